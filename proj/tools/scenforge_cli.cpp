// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Links only the C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "scenforge/scenforge.h"

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool verbose = false;
};

int exit_code(sf_status s) {
  switch (s) {
    case SF_OK: return 0;
    case SF_ERR_DOMAIN:
    case SF_ERR_INTERNAL: return 1;
    default: return 2;
  }
}

int report(sf_status s, const Globals& g, const std::string& what) {
  if (s != SF_OK) {
    std::cerr << "scenforge " << what << ": " << sf_status_name(s) << " error: " << sf_last_error() << "\n";
  } else if (g.verbose) {
    std::cerr << "scenforge " << what << ": ok\n";
  }
  return exit_code(s);
}

// Owns a string returned by the C API.
struct CString {
  char* p = nullptr;
  ~CString() { sf_string_free(p); }
};

struct Map {
  sf_map* p = nullptr;
  ~Map() { sf_map_free(p); }
};

struct Abstract {
  sf_abstract* p = nullptr;
  ~Abstract() { sf_abstract_free(p); }
};

struct Run {
  sf_run* p = nullptr;
  ~Run() { sf_run_free(p); }
};

int emit(const char* text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (*text && text[std::char_traits<char>::length(text) - 1] != '\n') std::cout << '\n';
    return 0;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    std::cerr << "scenforge: cannot write " << path << "\n";
    return 2;
  }
  f << text;
  return 0;
}

int run_stage(const Globals& g, const std::string& stage) {
  if (g.config.empty()) {
    std::cerr << "scenforge " << stage << ": --config run.toml is required\n";
    return 2;
  }
  Run run;
  sf_status s = sf_run_open(g.config.c_str(), &run.p);
  if (s == SF_OK && g.seed) s = sf_run_set_seed(run.p, *g.seed);
  if (s == SF_OK && !g.out.empty()) s = sf_run_set_out(run.p, g.out.c_str());
  if (s == SF_OK) s = sf_run_stage(run.p, stage.c_str());
  return report(s, g, stage);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scenforge: scenario generation and search-based testing for driving policies"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Run config (TOML); for search with --abstract, a search config")->option_text("FILE");
  app.add_option("--seed", g.seed, "Seed for synth and search");
  app.add_option("--out", g.out, "Output directory");
  app.add_flag("-v,--verbose", g.verbose, "Report each stage on stderr");
  app.set_version_flag("--version", sf_version());
  app.fallthrough();

  int code = 0;

  auto* extract = app.add_subcommand("extract", "Key frames from frames or a flow-field file");
  std::string input, out_file;
  double alpha = 0.5, interval = 0.1;
  extract->add_option("--input", input, "Frame directory or flow-field JSON (direct mode)");
  extract->add_option("--alpha", alpha, "Interpolation weight");
  extract->add_option("--frame-interval", interval, "Seconds between frames");
  extract->add_option("-o,--output", out_file, "Output file (direct mode; default stdout)");
  extract->callback([&] {
    if (input.empty()) {
      code = run_stage(g, "extract");
      return;
    }
    CString json;
    const auto s = sf_extract(input.c_str(), alpha, interval, &json.p);
    code = s == SF_OK ? emit(json.p, out_file) : report(s, g, "extract");
  });

  auto* abstract = app.add_subcommand("abstract", "Abstract scenarios from annotated key frames");
  abstract->callback([&] { code = run_stage(g, "abstract"); });

  auto* synth = app.add_subcommand("synth", "Concrete scenario programs from abstract scenarios");
  std::string abstract_path, map_path;
  synth->add_option("--abstract", abstract_path, "Abstract scenario JSON (direct mode)");
  synth->add_option("--map", map_path, "Map JSON (direct mode)");
  synth->add_option("-o,--output", out_file, "Output .scn (direct mode; default stdout)");
  synth->callback([&] {
    if (abstract_path.empty()) {
      code = run_stage(g, "synth");
      return;
    }
    if (map_path.empty() || !g.seed) {
      std::cerr << "scenforge synth: --map and --seed are required with --abstract\n";
      code = 2;
      return;
    }
    Map map;
    Abstract a;
    CString program;
    sf_status s = sf_map_load(map_path.c_str(), &map.p);
    if (s == SF_OK) s = sf_abstract_load(abstract_path.c_str(), &a.p);
    if (s == SF_OK) s = sf_synth(map.p, a.p, *g.seed, &program.p);
    code = s == SF_OK ? emit(program.p, out_file) : report(s, g, "synth");
  });

  auto* inspect = app.add_subcommand("inspect", "Feasibility and semantic-equivalence checks");
  std::string scenario_path;
  inspect->add_option("--scenario", scenario_path, "Scenario program (direct mode)");
  inspect->add_option("--map", map_path, "Map JSON (direct mode)");
  inspect->add_option("--abstract", abstract_path, "Abstract scenario for equivalence (direct mode)");
  inspect->callback([&] {
    if (scenario_path.empty()) {
      code = run_stage(g, "inspect");
      return;
    }
    std::ifstream f(scenario_path, std::ios::binary);
    if (!f || map_path.empty()) {
      std::cerr << "scenforge inspect: readable --scenario and --map are required\n";
      code = 2;
      return;
    }
    const std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    Map map;
    Abstract a;
    CString json;
    sf_status s = sf_map_load(map_path.c_str(), &map.p);
    if (s == SF_OK && !abstract_path.empty()) s = sf_abstract_load(abstract_path.c_str(), &a.p);
    if (s == SF_OK) s = sf_inspect(map.p, text.c_str(), a.p, &json.p);
    if (s != SF_OK) {
      code = report(s, g, "inspect");
      return;
    }
    emit(json.p, "");
    const std::string body = json.p;
    code = body.find("\"feasible\": false") != std::string::npos || body.find("\"equivalent\": false") != std::string::npos ? 1 : 0;
  });

  auto* search = app.add_subcommand("search", "Outer and inner search against a policy");
  std::string policy;
  search->add_option("--abstract", abstract_path, "Abstract scenario JSON (direct mode)");
  search->add_option("--map", map_path, "Map JSON (direct mode)");
  search->add_option("--policy", policy, "Policy under test (direct mode)");
  search->callback([&] {
    if (abstract_path.empty()) {
      code = run_stage(g, "search");
      return;
    }
    if (map_path.empty() || policy.empty() || g.out.empty() || !g.seed) {
      std::cerr << "scenforge search: --map, --policy, --out and --seed are required with --abstract\n";
      code = 2;
      return;
    }
    Map map;
    Abstract a;
    CString json;
    sf_status s = sf_map_load(map_path.c_str(), &map.p);
    if (s == SF_OK) s = sf_abstract_load(abstract_path.c_str(), &a.p);
    if (s == SF_OK)
      s = sf_search(map.p, a.p, policy.c_str(), g.config.empty() ? nullptr : g.config.c_str(), *g.seed, g.out.c_str(),
                    &json.p);
    code = s == SF_OK ? emit(json.p, "") : report(s, g, "search");
  });

  auto* replay = app.add_subcommand("replay", "Re-run a recorded violation");
  std::string replay_path, trace_path;
  replay->add_option("replay", replay_path, "Replay file")->required();
  replay->add_option("--map", map_path, "Map JSON")->required();
  replay->add_option("--trace", trace_path, "Write the trace as JSON Lines");
  replay->callback([&] {
    Map map;
    CString json;
    sf_status s = sf_map_load(map_path.c_str(), &map.p);
    if (s == SF_OK) s = sf_replay(map.p, replay_path.c_str(), trace_path.empty() ? nullptr : trace_path.c_str(), &json.p);
    code = s == SF_OK ? emit(json.p, "") : report(s, g, "replay");
  });

  auto* rep = app.add_subcommand("report", "Per-policy CSV tables and a markdown summary");
  rep->callback([&] { code = run_stage(g, "report"); });

  auto* all = app.add_subcommand("run", "All stages from extract to report");
  all->callback([&] { code = run_stage(g, "all"); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  return code;
}
