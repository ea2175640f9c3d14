// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "scenforge/scenforge.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "scenforge/abstraction.hpp"
#include "scenforge/pipeline.hpp"
#include "scenforge/synth.hpp"

struct sf_map {
  scenforge::RoadMap map;
};

struct sf_abstract {
  scenforge::abstraction::AbstractScenario a;
};

struct sf_run {
  scenforge::pipeline::RunConfig cfg;
};

namespace {

thread_local std::string g_error;

sf_status status_of(scenforge::ErrorKind k) {
  using scenforge::ErrorKind;
  switch (k) {
    case ErrorKind::domain: return SF_ERR_DOMAIN;
    case ErrorKind::precondition: return SF_ERR_PRECONDITION;
    case ErrorKind::usage: return SF_ERR_USAGE;
    case ErrorKind::io: return SF_ERR_IO;
    case ErrorKind::parse: return SF_ERR_PARSE;
  }
  return SF_ERR_INTERNAL;
}

template <class F>
sf_status guarded(F&& f) {
  g_error.clear();
  try {
    f();
    return SF_OK;
  } catch (const scenforge::Error& e) {
    g_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_error = "out of memory";
  } catch (const std::exception& e) {
    g_error = e.what();
  } catch (...) {
    g_error = "unknown error";
  }
  return SF_ERR_INTERNAL;
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void need(const void* p, const char* what) {
  if (!p) scenforge::fail(scenforge::ErrorKind::usage, std::string(what) + " is NULL");
}

}  // namespace

extern "C" {

const char* sf_version(void) { return scenforge::pipeline::kToolVersion; }

const char* sf_last_error(void) { return g_error.c_str(); }

const char* sf_status_name(sf_status s) {
  switch (s) {
    case SF_OK: return "ok";
    case SF_ERR_DOMAIN: return "domain";
    case SF_ERR_PRECONDITION: return "precondition";
    case SF_ERR_USAGE: return "usage";
    case SF_ERR_IO: return "io";
    case SF_ERR_PARSE: return "parse";
    case SF_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void sf_string_free(char* s) { std::free(s); }

sf_status sf_map_load(const char* path, sf_map** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new sf_map{scenforge::RoadMap::load(path)};
  });
}

void sf_map_free(sf_map* m) { delete m; }

sf_status sf_abstract_load(const char* path, sf_abstract** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new sf_abstract{scenforge::abstraction::load_abstract(path)};
  });
}

void sf_abstract_free(sf_abstract* a) { delete a; }

sf_status sf_extract(const char* input, double alpha, double frame_interval, char** out_json) {
  return guarded([&] {
    need(input, "input");
    need(out_json, "out_json");
    *out_json = nullptr;
    auto j = scenforge::pipeline::extract_key_frames_from(input, alpha, frame_interval);
    j.erase("states");
    *out_json = dup(j.dump(2));
  });
}

sf_status sf_synth(const sf_map* map, const sf_abstract* a, uint64_t seed, char** out_program) {
  return guarded([&] {
    need(map, "map");
    need(a, "abstract");
    need(out_program, "out_program");
    *out_program = nullptr;
    const auto g = scenforge::synth::generate_concrete(a->a, map->map, seed);
    *out_program = dup(scenforge::scenlang::print_scenario(g.scenario));
  });
}

sf_status sf_inspect(const sf_map* map, const char* program, const sf_abstract* a, char** out_json) {
  return guarded([&] {
    need(map, "map");
    need(program, "program");
    need(out_json, "out_json");
    *out_json = nullptr;
    const auto s = scenforge::scenlang::parse_scenario_or_throw(program);
    *out_json = dup(scenforge::pipeline::inspect_report(s, map->map, a ? &a->a : nullptr).dump(2));
  });
}

sf_status sf_search(const sf_map* map, const sf_abstract* a, const char* policy, const char* search_config,
                    uint64_t seed, const char* out_dir, char** out_json) {
  return guarded([&] {
    need(map, "map");
    need(a, "abstract");
    need(policy, "policy");
    need(out_dir, "out_dir");
    need(out_json, "out_json");
    *out_json = nullptr;
    auto cfg = search_config ? scenforge::pipeline::load_search_config(search_config) : scenforge::search::SearchConfig{};
    cfg.seed = seed;
    (void)scenforge::sim::make_policy(policy);
    const auto run = scenforge::search::run_search(a->a, map->map, policy, cfg);
    scenforge::search::write_outputs(out_dir, run, a->a.id, "");
    const nlohmann::json j{{"evaluations", run.outer.evaluations}, {"violations", run.records.size()}};
    *out_json = dup(j.dump());
  });
}

sf_status sf_replay(const sf_map* map, const char* replay_path, const char* trace_path, char** out_json) {
  return guarded([&] {
    need(map, "map");
    need(replay_path, "replay_path");
    need(out_json, "out_json");
    *out_json = nullptr;
    std::ifstream in(replay_path);
    if (!in) scenforge::fail(scenforge::ErrorKind::io, std::string("cannot read '") + replay_path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      scenforge::fail(scenforge::ErrorKind::parse, std::string(replay_path) + ": " + e.what());
    }
    const auto r = scenforge::sim::Replay::from_json(j);
    *out_json = dup(scenforge::pipeline::replay(r, map->map, trace_path ? trace_path : "").dump(2));
  });
}

sf_status sf_run_open(const char* config_path, sf_run** out) {
  return guarded([&] {
    need(config_path, "config_path");
    need(out, "out");
    *out = nullptr;
    *out = new sf_run{scenforge::pipeline::load_run_config(config_path)};
  });
}

void sf_run_free(sf_run* r) { delete r; }

sf_status sf_run_set_seed(sf_run* r, uint64_t seed) {
  return guarded([&] {
    need(r, "run");
    r->cfg.seed = seed;
    r->cfg.search.seed = seed;
  });
}

sf_status sf_run_set_out(sf_run* r, const char* out_dir) {
  return guarded([&] {
    need(r, "run");
    need(out_dir, "out_dir");
    r->cfg.out = out_dir;
  });
}

sf_status sf_run_stage(sf_run* r, const char* stage) {
  return guarded([&] {
    namespace p = scenforge::pipeline;
    need(r, "run");
    need(stage, "stage");
    const std::string s = stage;
    if (s == "extract") p::cmd_extract(r->cfg);
    else if (s == "abstract") p::cmd_abstract(r->cfg);
    else if (s == "synth") p::cmd_synth(r->cfg);
    else if (s == "inspect") p::cmd_inspect(r->cfg);
    else if (s == "search") p::cmd_search(r->cfg);
    else if (s == "report") p::cmd_report(r->cfg);
    else if (s == "all") p::run_all(r->cfg);
    else scenforge::fail(scenforge::ErrorKind::usage, "unknown stage '" + s + "'");
  });
}

}  // extern "C"
