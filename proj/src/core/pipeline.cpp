// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "scenforge/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "toml.hpp"

#include "scenforge/abstraction.hpp"
#include "scenforge/flowkey.hpp"
#include "scenforge/inspect.hpp"
#include "scenforge/synth.hpp"

namespace scenforge::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) fail(ErrorKind::io, "short write to '" + path.string() + "'");
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    fail(ErrorKind::parse, path + ": " + e.what());
  }
}

std::string resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return p;
  const fs::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal().string();
}

template <class T>
T get_or(const toml::table& t, std::string_view key, T fallback) {
  if (const auto* node = t.get(key)) {
    if constexpr (std::is_same_v<T, double>) {
      if (auto v = node->value<double>()) return *v;
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (auto v = node->value<std::string>()) return *v;
    } else {
      if (auto v = node->value<std::int64_t>()) return static_cast<T>(*v);
    }
    fail(ErrorKind::usage, "config key '" + std::string(key) + "' has the wrong type");
  }
  return fallback;
}

toml::table parse_toml(const std::string& text, const std::string& where) {
  try {
    return toml::parse(text, where);
  } catch (const toml::parse_error& e) {
    std::ostringstream ss;
    ss << where << ": " << e.description() << " at line " << e.source().begin.line;
    fail(ErrorKind::usage, ss.str());
  }
}

void apply_search_table(search::SearchConfig& c, const toml::table& root, const fs::path& base) {
  if (const auto* s = root["search"].as_table()) {
    c.outer_budget = get_or<int>(*s, "outer_budget", c.outer_budget);
    c.inner_budget = get_or<int>(*s, "inner_budget", c.inner_budget);
    c.sigma_pos = get_or<double>(*s, "sigma_pos", c.sigma_pos);
    c.sigma_speed = get_or<double>(*s, "sigma_speed", c.sigma_speed);
    c.type_flip_prob = get_or<double>(*s, "type_flip_prob", c.type_flip_prob);
    c.M = get_or<double>(*s, "M", c.M);
    c.seed = get_or<std::uint64_t>(*s, "seed", c.seed);
    c.population = get_or<int>(*s, "population", c.population);
    c.offspring = get_or<int>(*s, "offspring", c.offspring);
    c.resamples = get_or<int>(*s, "resamples", c.resamples);
    c.stuck_seconds = get_or<double>(*s, "stuck_seconds", c.stuck_seconds);
    c.threads = get_or<int>(*s, "threads", c.threads);
    const auto cost = get_or<std::string>(*s, "cost_model", "");
    if (!cost.empty()) c.costs = metrics::CostModel::load(resolve(base, cost));
  }
  if (const auto* s = root["sim"].as_table()) {
    c.sim.dt = get_or<double>(*s, "dt", c.sim.dt);
    c.sim.horizon = get_or<double>(*s, "horizon", c.sim.horizon);
    c.sim.seed = get_or<std::uint64_t>(*s, "seed", c.sim.seed);
  }
  if (const auto* s = root["policy"].as_table()) {
    c.policy.cruise_speed = get_or<double>(*s, "cruise_speed", c.policy.cruise_speed);
    c.policy.static_speed = get_or<double>(*s, "static_speed", c.policy.static_speed);
  }
  c.validate();
}

json search_to_json(const search::SearchConfig& c) {
  return {{"outer_budget", c.outer_budget}, {"inner_budget", c.inner_budget}, {"sigma_pos", c.sigma_pos},
          {"sigma_speed", c.sigma_speed},   {"type_flip_prob", c.type_flip_prob}, {"M", c.M},
          {"population", c.population},     {"offspring", c.offspring},          {"resamples", c.resamples},
          {"stuck_seconds", c.stuck_seconds}, {"sim_dt", c.sim.dt},               {"sim_horizon", c.sim.horizon},
          {"sim_seed", c.sim.seed},         {"cruise_speed", c.policy.cruise_speed},
          {"static_speed", c.policy.static_speed}, {"costs", c.costs.to_json()}};
}

// Stage bookkeeping: collects written files and folds them into the manifest.
class Stage {
 public:
  Stage(const RunConfig& cfg, std::string name) : cfg_(cfg), name_(std::move(name)), t0_(std::chrono::steady_clock::now()) {
    if (cfg_.out.empty()) fail(ErrorKind::usage, "no output directory");
  }

  fs::path path(const std::string& rel) const { return fs::path(cfg_.out) / rel; }

  void write(const std::string& rel, const std::string& text) {
    write_file(path(rel), text);
    files_.insert(rel);
  }

  // Every regular file below `rel_dir`.
  void record_tree(const std::string& rel_dir) {
    for (const auto& e : fs::recursive_directory_iterator(path(rel_dir)))
      if (e.is_regular_file()) files_.insert(fs::relative(e.path(), cfg_.out).generic_string());
  }

  std::string need(const std::string& rel, const std::string& producer) const {
    const auto p = path(rel);
    if (!fs::exists(p)) fail(ErrorKind::usage, "missing " + p.string() + "; run '" + producer + "' first");
    return p.string();
  }

  void commit() {
    const std::string config_text = cfg_.to_json().dump(2) + "\n";
    write_file(path("run_config.json"), config_text);
    const auto manifest_path = path("manifest.json").string();
    RunManifest m = RunManifest::load(manifest_path);
    const std::string hash = sha256_hex(config_text);
    if (m.config_hash != hash) {
      m.artifacts.clear();
      m.timings.clear();
    }
    m.config_hash = hash;
    std::erase_if(m.artifacts, [&](const ArtifactEntry& a) {
      return a.stage == name_ || files_.count(a.path) || a.path == "run_config.json";
    });
    for (const auto& f : files_) m.artifacts.push_back({name_, f, sha256_file(path(f).string())});
    m.artifacts.push_back({"config", "run_config.json", hash});
    std::sort(m.artifacts.begin(), m.artifacts.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    m.timings[name_] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    m.save(manifest_path);
  }

 private:
  const RunConfig& cfg_;
  std::string name_;
  std::chrono::steady_clock::time_point t0_;
  std::set<std::string> files_;
};

std::uint64_t need_seed(const RunConfig& cfg, const std::string& command) {
  if (!cfg.seed) fail(ErrorKind::usage, command + " needs a seed (--seed or seed = N in the config)");
  return *cfg.seed;
}

std::unique_ptr<abstraction::Provider> make_provider(const RunConfig& cfg) {
  if (cfg.provider == ProviderMode::remote)
    return std::make_unique<abstraction::RemoteProvider>(abstraction::RemoteConfig::from_env());
  return std::make_unique<abstraction::MockProvider>();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

json RunConfig::to_json() const {
  json vids = json::array();
  for (const auto& v : videos)
    vids.push_back({{"id", v.id}, {"frames", v.frames}, {"flow", v.flow}, {"annotations", v.annotations},
                    {"frame_interval", v.frame_interval}});
  return {{"map", map},
          {"videos", vids},
          {"provider", provider == ProviderMode::mock ? "mock" : "remote"},
          {"policies", policies},
          {"seed", seed ? json(*seed) : json(nullptr)},
          {"alpha", alpha},
          {"search", search_to_json(search)}};
}

void apply_search_toml(search::SearchConfig& c, const std::string& toml_text, const std::string& base_dir) {
  apply_search_table(c, parse_toml(toml_text, "search config"), base_dir);
}

search::SearchConfig load_search_config(const std::string& path) {
  search::SearchConfig c;
  apply_search_table(c, parse_toml(read_file(path), path), fs::path(path).parent_path());
  return c;
}

RunConfig load_run_config(const std::string& path) {
  const fs::path base = fs::path(path).parent_path();
  const auto root = parse_toml(read_file(path), path);
  RunConfig cfg;
  cfg.map = resolve(base, get_or<std::string>(root, "map", ""));
  if (cfg.map.empty()) fail(ErrorKind::usage, path + ": 'map' is required");
  if (!fs::exists(cfg.map)) fail(ErrorKind::io, "map '" + cfg.map + "' does not exist");
  if (const auto* seed = root.get("seed")) {
    const auto v = seed->value<std::int64_t>();
    if (!v || *v < 0) fail(ErrorKind::usage, "seed must be a non-negative integer");
    cfg.seed = static_cast<std::uint64_t>(*v);
  }
  cfg.out = resolve(base, get_or<std::string>(root, "out", ""));
  cfg.alpha = get_or<double>(root, "alpha", cfg.alpha);
  const auto provider = get_or<std::string>(root, "provider", "mock");
  if (provider == "mock") cfg.provider = ProviderMode::mock;
  else if (provider == "remote") cfg.provider = ProviderMode::remote;
  else fail(ErrorKind::usage, "provider must be 'mock' or 'remote'");
  if (const auto* pol = root["policies"].as_array()) {
    cfg.policies.clear();
    for (const auto& p : *pol) {
      const auto name = p.value<std::string>();
      if (!name) fail(ErrorKind::usage, "policies must be strings");
      const auto known = sim::builtin_policy_names();
      if (std::find(known.begin(), known.end(), *name) == known.end())
        fail(ErrorKind::usage, "unknown policy '" + *name + "'");
      cfg.policies.push_back(*name);
    }
  }
  if (const auto* vids = root["videos"].as_array()) {
    for (const auto& node : *vids) {
      const auto* t = node.as_table();
      if (!t) fail(ErrorKind::usage, "[[videos]] entries must be tables");
      VideoInput v;
      v.id = get_or<std::string>(*t, "id", "");
      v.frames = resolve(base, get_or<std::string>(*t, "frames", ""));
      v.flow = resolve(base, get_or<std::string>(*t, "flow", ""));
      v.annotations = resolve(base, get_or<std::string>(*t, "annotations", ""));
      v.frame_interval = get_or<double>(*t, "frame_interval", v.frame_interval);
      if (v.id.empty() || !scenlang::is_identifier(v.id)) fail(ErrorKind::usage, "video id '" + v.id + "' is not an identifier");
      if (v.frames.empty() == v.flow.empty()) fail(ErrorKind::usage, "video " + v.id + ": set exactly one of frames and flow");
      for (const auto& p : {v.frames, v.flow, v.annotations})
        if (!p.empty() && !fs::exists(p)) fail(ErrorKind::io, "video " + v.id + ": '" + p + "' does not exist");
      if (v.annotations.empty()) fail(ErrorKind::usage, "video " + v.id + ": annotations are required");
      cfg.videos.push_back(std::move(v));
    }
  }
  apply_search_table(cfg.search, root, base);
  if (cfg.seed) cfg.search.seed = *cfg.seed;
  return cfg;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorKind::domain, "sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xF];
  }
  return out;
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_file(path)); }

json RunManifest::to_json() const {
  json arts = json::array();
  for (const auto& a : artifacts) arts.push_back({{"stage", a.stage}, {"path", a.path}, {"sha256", a.sha256}});
  return {{"tool_version", tool_version}, {"config_hash", config_hash}, {"artifacts", arts}, {"timings", timings}};
}

RunManifest RunManifest::from_json(const json& j) {
  try {
    RunManifest m;
    m.tool_version = j.at("tool_version").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    for (const auto& a : j.at("artifacts"))
      m.artifacts.push_back({a.at("stage").get<std::string>(), a.at("path").get<std::string>(), a.at("sha256").get<std::string>()});
    m.timings = j.value("timings", std::map<std::string, double>{});
    return m;
  } catch (const json::exception& e) {
    fail(ErrorKind::parse, std::string("manifest: ") + e.what());
  }
}

RunManifest RunManifest::load(const std::string& path) {
  if (!fs::exists(path)) return {};
  return from_json(read_json(path));
}

void RunManifest::save(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  write_file(tmp, to_json().dump(2) + "\n");
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::io, "cannot move manifest into place: " + ec.message());
}

json extract_key_frames_from(const std::string& input, double alpha, double frame_interval) {
  std::vector<flowkey::MotionStateVector> states;
  if (fs::is_directory(input)) {
    const auto frames = flowkey::load_frame_directory(input, frame_interval);
    const auto tracks = flowkey::track_objects(frames);
    states = flowkey::build_motion_states(tracks, static_cast<int>(frames.size()));
  } else {
    if (!fs::exists(input)) fail(ErrorKind::io, "input '" + input + "' does not exist");
    states = flowkey::states_from_json(read_json(input));
  }
  flowkey::KeyFrameOptions opts;
  opts.alpha = alpha;
  const auto k = flowkey::extract_key_frames(states, opts);
  json j = flowkey::key_frames_to_json(k);
  j["frame_count"] = states.size();
  j["states"] = flowkey::states_to_json(states);
  return j;
}

json replay(const sim::Replay& r, const RoadMap& map, const std::string& trace_path) {
  const auto s = scenlang::parse_scenario_or_throw(r.scenario);
  auto policy = sim::make_policy(r.policy);
  sim::SimOptions opts;
  opts.seed = r.seed;
  opts.dt = r.dt;
  opts.horizon = r.horizon;
  const auto trace = sim::run_scenario(s, map, *policy, opts);
  const auto verdicts = sim::monitor_assertions(trace, s.assertions, sim::destination_of(s, map));
  if (!trace_path.empty()) write_file(trace_path, sim::trace_to_jsonl(trace));
  json vs = json::array();
  for (const auto& v : verdicts) {
    json e{{"status", v.status == sim::VerdictStatus::violated ? "violated" : "satisfied"}, {"detail", v.detail}};
    e["step"] = v.step ? json(*v.step) : json(nullptr);
    vs.push_back(e);
  }
  return {{"termination", std::string(sim::to_string(trace.termination))}, {"steps", trace.steps.size()}, {"verdicts", vs}};
}

json inspect_report(const scenlang::ConcreteScenario& s, const RoadMap& map, const abstraction::AbstractScenario* a) {
  const auto feas = inspect::check_feasibility(s, map);
  json diags = json::array();
  for (const auto& d : feas.diagnostics)
    diags.push_back({{"constraint", std::string(inspect::to_string(d.constraint))}, {"participant", d.participant}, {"detail", d.detail}});
  json j{{"feasible", feas.feasible()}, {"diagnostics", diags}};
  if (a) {
    const auto eq = inspect::check_semantic_equivalence(s, *a, map);
    json diffs = json::array();
    for (const auto& d : eq.diffs)
      diffs.push_back({{"participant", d.participant}, {"expected", to_string(d.expected)}, {"actual", to_string(d.actual)},
                       {"diagnostics", d.diagnostics}});
    j["equivalent"] = eq.equivalent;
    j["diffs"] = diffs;
  }
  return j;
}

void cmd_extract(const RunConfig& cfg) {
  Stage st(cfg, "extract");
  for (const auto& v : cfg.videos) {
    auto j = extract_key_frames_from(v.frames.empty() ? v.flow : v.frames, cfg.alpha, v.frame_interval);
    st.write(v.id + "/motion_states.json", j["states"].dump(1) + "\n");
    j.erase("states");
    j["source"] = v.frames.empty() ? "flow" : "frames";
    st.write(v.id + "/key_frames.json", j.dump(2) + "\n");
  }
  st.commit();
}

void cmd_abstract(const RunConfig& cfg) {
  Stage st(cfg, "abstract");
  auto provider = make_provider(cfg);
  for (const auto& v : cfg.videos) {
    const json kf = read_json(st.need(v.id + "/key_frames.json", "extract"));
    abstraction::SceneInput input;
    input.log = abstraction::load_annotation(v.annotations);
    if (!v.frames.empty()) {
      const auto frames = flowkey::load_frame_directory(v.frames, v.frame_interval);
      for (int k : kf.at("indices").get<std::vector<int>>())
        if (k >= 0 && static_cast<std::size_t>(k) < frames.size()) input.key_frames.push_back(frames[static_cast<std::size_t>(k)]);
    }
    auto a = abstraction::understand_scene(*provider, input);
    a.id = v.id;
    st.write(v.id + "/abstract.json", abstraction::to_json(a).dump(2) + "\n");
  }
  st.commit();
}

void cmd_synth(const RunConfig& cfg) {
  const auto seed = need_seed(cfg, "synth");
  Stage st(cfg, "synth");
  const auto map = RoadMap::load(cfg.map);
  for (const auto& v : cfg.videos) {
    const auto a = abstraction::load_abstract(st.need(v.id + "/abstract.json", "abstract"));
    synth::Generation g;
    if (cfg.provider == ProviderMode::remote) {
      auto provider = make_provider(cfg);
      g = synth::generate_concrete_remote(a, map, *provider);
    } else {
      g = synth::generate_concrete(a, map, seed);
    }
    st.write(v.id + "/scenario.scn", scenlang::print_scenario(g.scenario));
  }
  st.commit();
}

void cmd_inspect(const RunConfig& cfg) {
  Stage st(cfg, "inspect");
  const auto map = RoadMap::load(cfg.map);
  std::vector<std::string> failed;
  for (const auto& v : cfg.videos) {
    const auto a = abstraction::load_abstract(st.need(v.id + "/abstract.json", "abstract"));
    const auto s = scenlang::parse_scenario_or_throw(read_file(st.need(v.id + "/scenario.scn", "synth")));
    const auto j = inspect_report(s, map, &a);
    st.write(v.id + "/inspect.json", j.dump(2) + "\n");
    if (!j["feasible"].get<bool>() || !j["equivalent"].get<bool>()) failed.push_back(v.id);
  }
  st.commit();
  if (!failed.empty()) {
    std::string list;
    for (const auto& f : failed) list += (list.empty() ? "" : ", ") + f;
    fail(ErrorKind::domain, "inspection failed for " + list);
  }
}

void cmd_search(const RunConfig& cfg) {
  const auto seed = need_seed(cfg, "search");
  Stage st(cfg, "search");
  const auto map = RoadMap::load(cfg.map);
  auto sc = cfg.search;
  sc.seed = seed;
  for (const auto& v : cfg.videos) {
    const auto a = abstraction::load_abstract(st.need(v.id + "/abstract.json", "abstract"));
    for (const auto& policy : cfg.policies) {
      const std::string rel = v.id + "/search/" + policy;
      std::error_code ec;
      fs::remove_all(st.path(rel), ec);
      const auto run = search::run_search(a, map, policy, sc, v.id);
      search::write_outputs(st.path(rel).string(), run, a.id, v.id);
      st.record_tree(rel);
    }
  }
  st.commit();
}

Report build_report(const std::string& out_dir, const std::vector<std::string>& videos,
                    const std::vector<std::string>& policies) {
  Report rep;
  std::ostringstream md;
  md << "# Search report\n\n";
  for (const auto& policy : policies) {
    std::ostringstream csv;
    csv << "video,abstract_id,evaluations,svs,tvs_to_first_sv,collision,traffic_disruption,rule_violation,universal,"
           "max_rv,essential\n";
    std::map<std::string, std::size_t> histogram{{"collision", 0}, {"traffic_disruption", 0}, {"rule_violation", 0}};
    std::size_t total = 0, total_evals = 0;
    for (const auto& vid : videos) {
      const fs::path dir = fs::path(out_dir) / vid / "search" / policy;
      const auto jsonl = dir / "violations.jsonl";
      if (!fs::exists(jsonl)) fail(ErrorKind::usage, "missing " + jsonl.string() + "; run 'search' first");
      std::vector<search::ViolationRecord> records;
      std::istringstream lines(read_file(jsonl.string()));
      for (std::string line; std::getline(lines, line);)
        if (!line.empty()) records.push_back(search::ViolationRecord::from_json(json::parse(line)));
      std::size_t evaluations = 0;
      std::string abstract_id = vid;
      if (fs::exists(dir / "summary.csv")) {
        std::istringstream s(read_file((dir / "summary.csv").string()));
        std::string header, row;
        std::getline(s, header);
        if (std::getline(s, row)) {
          std::vector<std::string> cols;
          std::stringstream rs(row);
          for (std::string c; std::getline(rs, c, ',');) cols.push_back(c);
          if (cols.size() > 2) {
            abstract_id = cols[1];
            evaluations = std::stoul(cols[2]);
          }
        }
      }
      std::map<std::string, std::size_t> kinds{{"collision", 0}, {"traffic_disruption", 0}, {"rule_violation", 0}};
      std::size_t universal = 0, first = 0;
      double max_rv = 0.0;
      std::set<std::string> essential;
      for (const auto& r : records) {
        ++kinds[std::string(search::to_string(r.kind))];
        ++histogram[std::string(search::to_string(r.kind))];
        universal += r.universal;
        max_rv = std::max(max_rv, r.RV);
        essential.insert(r.essential.begin(), r.essential.end());
        first = first == 0 ? r.evaluation + 1 : std::min(first, r.evaluation + 1);
      }
      std::string ess;
      for (const auto& e : essential) ess += (ess.empty() ? "" : ";") + e;
      csv << csv_field(vid) << ',' << csv_field(abstract_id) << ',' << evaluations << ',' << records.size() << ','
          << (first ? std::to_string(first) : std::string("-")) << ',' << kinds["collision"] << ','
          << kinds["traffic_disruption"] << ',' << kinds["rule_violation"] << ',' << universal << ','
          << fixed(max_rv, 3) << ',' << csv_field(ess) << '\n';
      total += records.size();
      total_evals += evaluations;
    }
    rep.csv_by_policy[policy] = csv.str();
    md << "## " << policy << "\n\n"
       << "Videos: " << videos.size() << ", evaluations: " << total_evals << ", safety violations: " << total << "\n\n"
       << "| kind | count |\n|---|---|\n";
    for (const auto& [k, n] : histogram) md << "| " << k << " | " << n << " |\n";
    md << "\n";
  }
  rep.markdown = md.str();
  return rep;
}

void cmd_report(const RunConfig& cfg) {
  Stage st(cfg, "report");
  std::vector<std::string> vids;
  for (const auto& v : cfg.videos) vids.push_back(v.id);
  const auto rep = build_report(cfg.out, vids, cfg.policies);
  for (const auto& [policy, csv] : rep.csv_by_policy) st.write("report/" + policy + ".csv", csv);
  st.write("report/summary.md", rep.markdown);
  st.commit();
}

void run_all(const RunConfig& cfg) {
  cmd_extract(cfg);
  cmd_abstract(cfg);
  cmd_synth(cfg);
  cmd_inspect(cfg);
  cmd_search(cfg);
  cmd_report(cfg);
}

}  // namespace scenforge::pipeline
