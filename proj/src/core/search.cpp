// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "scenforge/search.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "scenforge/inspect.hpp"
#include "scenforge/motion.hpp"
#include "scenforge/synth.hpp"

namespace scenforge::search {

using scenlang::ConcreteScenario;
using scenlang::LanePosition;
using scenlang::TrajectoryDef;

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Run seed -> generation -> candidate.
std::mt19937_64 derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return std::mt19937_64(splitmix(splitmix(splitmix(seed) ^ a) ^ b));
}

constexpr std::uint64_t kInnerStream = 0x696E6E6572ULL;

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Box-Muller; std::normal_distribution differs between standard libraries.
double gaussian(std::mt19937_64& rng, double sigma) {
  if (sigma <= 0.0) {
    (void)rng();
    (void)rng();
    return 0.0;
  }
  const double u1 = 1.0 - unit(rng);
  const double u2 = unit(rng);
  return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

template <class F>
void parallel_for(std::size_t n, int threads, F&& f) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          f(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double end_time(const TrajectoryDef& def, const RoadMap& map) {
  if (def.waypoints.size() < 2) return def.waypoints.empty() ? 0.0 : def.waypoints.front().time.value_or(0.0);
  return ScriptedMotion(def, map).end_time();
}

double limit_at(const scenlang::Waypoint& w, const RoadMap& map) {
  if (const auto* lp = std::get_if<LanePosition>(&w.position)) return map.lane(lp->lane).speed_limit;
  if (const auto hit = map.locate(std::get<Vec2>(w.position))) return hit->lane->speed_limit;
  return 13.9;
}

TrajectoryDef perturb(const TrajectoryDef& parent, bool pedestrian, const RoadMap& map, double sigma_pos,
                      double sigma_speed, double flip_prob, std::mt19937_64& rng) {
  const double ds = gaussian(rng, sigma_pos);
  const double dv = gaussian(rng, sigma_speed);
  const bool flip = unit(rng) < flip_prob;

  TrajectoryDef def = parent;
  if (!pedestrian && flip)
    def.type = def.type == ParticipantType::car ? ParticipantType::truck
               : def.type == ParticipantType::truck ? ParticipantType::car
                                                    : def.type;

  // Positions: vehicles move along their starting lane, pedestrians along the nearest road axis.
  if (pedestrian) {
    if (!def.waypoints.empty()) {
      const Vec2 p0 = std::get<Vec2>(def.waypoints.front().position);
      Vec2 axis{1.0, 0.0};
      if (const auto hit = map.locate(p0)) axis = hit->lane->centerline.tangent_at(hit->s);
      for (auto& w : def.waypoints) {
        const Vec2 p = std::get<Vec2>(w.position) + axis * ds;
        w.position = Vec2{round2(p.x), round2(p.y)};
      }
    }
  } else if (!def.waypoints.empty()) {
    const std::string first = std::get<LanePosition>(def.waypoints.front().position).lane;
    for (auto& w : def.waypoints) {
      auto& lp = std::get<LanePosition>(w.position);
      if (lp.lane != first) continue;
      lp.offset = round2(std::clamp(lp.offset + ds, 0.5, map.lane(lp.lane).length() - 0.5));
    }
  }

  for (auto& w : def.waypoints)
    if (w.speed > 0.0) w.speed = round2(std::clamp(w.speed + dv, 0.5, std::max(0.5, limit_at(w, map))));

  // Explicit times: holds keep their duration, timed moves scale with the speed change.
  bool timed = false;
  for (std::size_t i = 1; i < def.waypoints.size(); ++i) timed = timed || def.waypoints[i].time.has_value();
  if (timed) {
    const auto old_times = ScriptedMotion(parent, map).waypoint_times();
    for (std::size_t i = 1; i < def.waypoints.size(); ++i) {
      auto& w = def.waypoints[i];
      if (!w.time) continue;
      const double d_old = old_times[i] - old_times[i - 1];
      const bool hold = w.position == def.waypoints[i - 1].position;
      const double factor = hold || w.speed <= 0.0 ? 1.0 : parent.waypoints[i].speed / w.speed;
      TrajectoryDef prefix = def;
      prefix.waypoints.resize(i);
      w.time = round2(end_time(prefix, map) + d_old * factor);
    }
  }
  return def;
}

bool admissible(const ConcreteScenario& s, const abstraction::AbstractScenario& a, const RoadMap& map) {
  if (!scenlang::validate_refs(s, map).empty()) return false;
  for (const auto* p : s.participants()) {
    if (p->waypoints.size() < 2) return false;
    for (std::size_t i = 1; i < p->waypoints.size(); ++i)
      if (p->waypoints[i].time && p->waypoints[i].time <= p->waypoints[i - 1].time.value_or(-1.0)) return false;
  }
  try {
    if (!inspect::check_feasibility(s, map).feasible()) return false;
    return inspect::check_semantic_equivalence(s, a, map).equivalent;
  } catch (const Error&) {
    return false;
  }
}

struct Outcome {
  std::vector<sim::Verdict> verdicts;
  std::optional<ViolationKind> kind;
  Trajectory ego;
};

Outcome simulate(const ConcreteScenario& s, const RoadMap& map, const std::string& policy, const SearchConfig& config) {
  const auto feas = inspect::check_feasibility(s, map);
  if (!feas.feasible())
    fail(ErrorKind::domain, "search produced an infeasible scenario: " + feas.diagnostics.front().participant + ": " +
                                feas.diagnostics.front().detail);
  auto p = sim::make_policy(policy, config.policy);
  const auto trace = sim::run_scenario(s, map, *p, config.sim);
  Outcome out;
  out.verdicts = sim::monitor_assertions(trace, s.assertions, sim::destination_of(s, map), config.sim.collision_tolerance);
  const bool violated = std::any_of(out.verdicts.begin(), out.verdicts.end(),
                                    [](const sim::Verdict& v) { return v.status == sim::VerdictStatus::violated; });
  if (violated) out.kind = classify_violation(out.verdicts, trace, config);
  if (auto it = trace.trajectories.find("ego"); it != trace.trajectories.end()) out.ego = it->second;
  return out;
}

bool better(const Candidate& x, const Candidate& y) {
  if (x.D.has_value() != y.D.has_value()) return x.D.has_value();
  if (x.D && *x.D != *y.D) return *x.D > *y.D;
  return x.evaluation < y.evaluation;
}

}  // namespace

void SearchConfig::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorKind::usage, "search config: " + what);
  };
  need(outer_budget >= 1 && inner_budget >= 1, "budgets must be at least 1");
  need(sigma_pos > 0.0 && sigma_speed > 0.0, "sigmas must be positive");
  need(type_flip_prob >= 0.0 && type_flip_prob <= 1.0, "type_flip_prob must lie in [0, 1]");
  need(M > 0.0, "M must be positive");
  need(population >= 1 && offspring >= 1, "population and offspring must be at least 1");
  need(resamples >= 1, "resamples must be at least 1");
  need(inner_sigma_scale > 0.0, "inner_sigma_scale must be positive");
  need(stuck_seconds > 0.0 && stuck_speed > 0.0, "stuck thresholds must be positive");
}

std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::collision: return "collision";
    case ViolationKind::traffic_disruption: return "traffic_disruption";
    case ViolationKind::rule_violation: return "rule_violation";
  }
  return "?";
}

std::optional<ViolationKind> violation_kind_from_string(std::string_view s) {
  for (auto k : {ViolationKind::collision, ViolationKind::traffic_disruption, ViolationKind::rule_violation})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

bool Candidate::violated() const {
  return std::any_of(verdicts.begin(), verdicts.end(),
                     [](const sim::Verdict& v) { return v.status == sim::VerdictStatus::violated; });
}

ActionSequence human_action_sequence(const abstraction::AbstractScenario& a) {
  for (const auto& p : a.participants)
    if (p.role == abstraction::Role::ego) return p.behaviors;
  fail(ErrorKind::precondition, "abstract scenario '" + a.id + "' has no ego");
}

ConcreteScenario mutate_scenario(const ConcreteScenario& s, const abstraction::AbstractScenario& a, const RoadMap& map,
                                 const SearchConfig& config, std::mt19937_64& rng, bool inner) {
  const double scale = inner ? config.inner_sigma_scale : 1.0;
  const double flip = inner ? 0.0 : config.type_flip_prob;
  for (int attempt = 0; attempt < config.resamples; ++attempt) {
    ConcreteScenario m = s;
    for (auto& d : m.npcs) d = perturb(d, false, map, config.sigma_pos * scale, config.sigma_speed * scale, flip, rng);
    for (auto& d : m.pedestrians)
      d = perturb(d, true, map, config.sigma_pos * scale, config.sigma_speed * scale, 0.0, rng);
    if (m == s || admissible(m, a, map)) return m;
  }
  return s;
}

double longest_slow_stretch(const sim::ExecutionTrace& trace, double speed) {
  double best = 0.0, run = 0.0;
  for (const auto& st : trace.steps) {
    if (!st.entities.empty() && st.entities.front().speed < speed) {
      run += trace.dt;
      best = std::max(best, run);
    } else {
      run = 0.0;
    }
  }
  return best;
}

std::optional<ViolationKind> classify_violation(const std::vector<sim::Verdict>& verdicts,
                                                const sim::ExecutionTrace& trace, const SearchConfig& config) {
  bool collision = false, destination = false, clearance = false;
  for (const auto& v : verdicts) {
    if (v.status != sim::VerdictStatus::violated) continue;
    switch (v.assertion.kind) {
      case scenlang::AssertionKind::never_collision: collision = true; break;
      case scenlang::AssertionKind::eventually_at_destination: destination = true; break;
      case scenlang::AssertionKind::always_clearance: clearance = true; break;
    }
  }
  require(collision || destination || clearance, "classify_violation: no violated verdict");
  if (collision) return ViolationKind::collision;
  // The trace's tick count carries the stuck time; one tick of slack absorbs float accumulation.
  if (destination && longest_slow_stretch(trace, config.stuck_speed) + 1e-9 >= config.stuck_seconds)
    return ViolationKind::traffic_disruption;
  if (clearance) return ViolationKind::rule_violation;
  return std::nullopt;
}

Candidate evaluate(const ConcreteScenario& s, const abstraction::AbstractScenario& a, const RoadMap& map,
                   const std::string& policy, const SearchConfig& config) {
  Candidate c;
  c.scenario = s;
  auto out = simulate(s, map, policy, config);
  c.verdicts = std::move(out.verdicts);
  c.violation = out.kind;
  c.equivalent = inspect::check_semantic_equivalence(s, a, map).equivalent;
  if (out.ego.size() >= 2) c.ego_actions = inspect::extract_action_sequence(out.ego, map, s.ego.type).actions;
  if (c.equivalent) c.D = metrics::behavior_distance(c.ego_actions, human_action_sequence(a), config.costs);
  return c;
}

OuterResult outer_search(const abstraction::AbstractScenario& a, const std::vector<ConcreteScenario>& seeds,
                         const RoadMap& map, const std::string& policy, const SearchConfig& config) {
  config.validate();
  (void)human_action_sequence(a);
  std::vector<ConcreteScenario> feasible;
  for (const auto& s : seeds)
    if (scenlang::validate_refs(s, map).empty() && inspect::check_feasibility(s, map).feasible()) feasible.push_back(s);
  if (feasible.empty()) fail(ErrorKind::domain, "outer search: no feasible seed scenario");

  const auto budget = static_cast<std::size_t>(config.outer_budget);
  OuterResult r;
  std::set<std::string> reported;
  auto run_batch = [&](std::vector<ConcreteScenario> batch) {
    std::vector<Candidate> out(batch.size());
    parallel_for(batch.size(), config.threads, [&](std::size_t i) { out[i] = evaluate(batch[i], a, map, policy, config); });
    for (auto& c : out) {
      c.evaluation = r.evaluations++;
      if (c.violation && c.equivalent && reported.insert(scenlang::print_scenario(c.scenario)).second)
        r.violations.push_back(c);
      r.evaluated.push_back(c);
      r.population.push_back(std::move(c));
    }
    std::stable_sort(r.population.begin(), r.population.end(), better);
    if (r.population.size() > static_cast<std::size_t>(config.population))
      r.population.resize(static_cast<std::size_t>(config.population));
  };

  if (feasible.size() > budget) feasible.resize(budget);
  run_batch(feasible);

  for (std::uint64_t gen = 1; r.evaluations < budget; ++gen) {
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(config.offspring), budget - r.evaluations);
    std::vector<ConcreteScenario> children(n);
    const auto parents = r.population;
    parallel_for(n, config.threads, [&](std::size_t k) {
      auto rng = derive(config.seed, gen, k);
      const auto& parent = parents[static_cast<std::size_t>(rng() % parents.size())];
      children[k] = mutate_scenario(parent.scenario, a, map, config, rng);
    });
    run_batch(std::move(children));
  }
  return r;
}

metrics::ScenarioPaths scenario_paths(const ConcreteScenario& s, const RoadMap& map) {
  metrics::ScenarioPaths out;
  for (const auto* p : s.participants())
    out.push_back(metrics::path_of(ScriptedMotion(*p, map).sample(0.1)));
  return out;
}

InnerResult inner_search(const ConcreteScenario& violation, const abstraction::AbstractScenario& a, const RoadMap& map,
                         const std::string& policy, const SearchConfig& config, std::uint64_t stream) {
  config.validate();
  const auto base = simulate(violation, map, policy, config);
  require(base.kind.has_value(), "inner search: scenario does not reproduce a violation");
  InnerResult r;
  r.kind = *base.kind;

  const auto n = static_cast<std::size_t>(config.inner_budget);
  std::vector<ConcreteScenario> vars(n);
  std::vector<std::optional<ViolationKind>> kinds(n);
  parallel_for(n, config.threads, [&](std::size_t k) {
    auto rng = derive(config.seed, kInnerStream ^ stream, k);
    vars[k] = mutate_scenario(violation, a, map, config, rng, true);
    kinds[k] = simulate(vars[k], map, policy, config).kind;
  });
  r.evaluations = n + 1;
  std::vector<metrics::ScenarioPaths> z;
  for (std::size_t k = 0; k < n; ++k) {
    if (kinds[k] != r.kind) continue;
    z.push_back(scenario_paths(vars[k], map));
    r.Z.push_back(std::move(vars[k]));
  }
  r.RV = metrics::variation_range(scenario_paths(violation, map), z);
  r.universal = r.RV >= config.M;
  return r;
}

std::vector<std::string> minimize_essential(const ConcreteScenario& violation, const RoadMap& map,
                                            const std::string& policy, const SearchConfig& config) {
  const auto base = simulate(violation, map, policy, config);
  require(base.kind.has_value(), "minimize: scenario does not reproduce a violation");
  std::vector<std::string> names;
  for (const auto* p : violation.participants()) names.push_back(p->name);
  std::vector<char> essential(names.size(), 0);
  parallel_for(names.size(), config.threads, [&](std::size_t i) {
    ConcreteScenario reduced = violation;
    reduced.remove(names[i]);
    essential[i] = simulate(reduced, map, policy, config).kind != base.kind;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < names.size(); ++i)
    if (essential[i]) out.push_back(names[i]);
  return out;
}

nlohmann::json ViolationRecord::to_json() const {
  return {{"abstract_id", abstract_id}, {"source_video", source_video}, {"kind", std::string(to_string(kind))},
          {"D", D},  {"RV", RV},  {"universal", universal},  {"essential", essential},
          {"evaluation", evaluation}, {"replay", replay.to_json()}, {"variations", variations}};
}

ViolationRecord ViolationRecord::from_json(const nlohmann::json& j) {
  try {
    ViolationRecord r;
    r.abstract_id = j.at("abstract_id").get<std::string>();
    r.source_video = j.value("source_video", "");
    const auto kind = violation_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) fail(ErrorKind::parse, "violation record: unknown kind");
    r.kind = *kind;
    r.D = j.at("D").get<double>();
    r.RV = j.at("RV").get<double>();
    r.universal = j.at("universal").get<bool>();
    r.essential = j.at("essential").get<std::vector<std::string>>();
    r.evaluation = j.at("evaluation").get<std::size_t>();
    r.replay = sim::Replay::from_json(j.at("replay"));
    r.variations = j.value("variations", std::vector<std::string>{});
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, std::string("violation record: ") + e.what());
  }
}

std::vector<ConcreteScenario> seed_scenarios(const abstraction::AbstractScenario& a, const RoadMap& map,
                                             const SearchConfig& config) {
  std::vector<ConcreteScenario> out;
  std::set<std::string> seen;
  std::string last_error;
  for (int i = 0; i < config.population; ++i) {
    try {
      auto g = synth::generate_concrete(a, map, config.seed + static_cast<std::uint64_t>(i));
      if (seen.insert(scenlang::print_scenario(g.scenario)).second) out.push_back(std::move(g.scenario));
    } catch (const Error& e) {
      last_error = e.what();
    }
  }
  if (out.empty()) fail(ErrorKind::domain, "no feasible seed scenario for '" + a.id + "': " + last_error);
  return out;
}

SearchRun run_search(const abstraction::AbstractScenario& a, const RoadMap& map, const std::string& policy,
                     const SearchConfig& config, const std::string& source_video) {
  SearchRun run;
  run.outer = outer_search(a, seed_scenarios(a, map, config), map, policy, config);
  std::uint64_t stream = 0;
  for (const auto& c : run.outer.violations) {
    const auto inner = inner_search(c.scenario, a, map, policy, config, stream++);
    ViolationRecord r;
    r.abstract_id = a.id;
    r.source_video = source_video;
    r.replay = {scenlang::print_scenario(c.scenario), policy, config.sim.seed, config.sim.dt, config.sim.horizon};
    r.kind = inner.kind;
    r.D = c.D.value_or(0.0);
    r.RV = inner.RV;
    r.universal = inner.universal;
    r.essential = minimize_essential(c.scenario, map, policy, config);
    for (const auto& z : inner.Z) r.variations.push_back(scenlang::print_scenario(z));
    r.evaluation = c.evaluation;
    run.records.push_back(std::move(r));
  }
  return run;
}

void write_outputs(const std::string& dir, const SearchRun& run, const std::string& abstract_id,
                   const std::string& source_video) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "replays", ec);
  if (ec) fail(ErrorKind::io, "cannot create " + dir + ": " + ec.message());
  auto write = [](const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) fail(ErrorKind::io, "cannot write " + p.string());
    f << text;
  };

  std::ostringstream jsonl;
  std::size_t counts[3] = {0, 0, 0};
  std::size_t universal = 0;
  double max_rv = 0.0;
  std::set<std::string> essential;
  for (std::size_t i = 0; i < run.records.size(); ++i) {
    const auto& r = run.records[i];
    jsonl << r.to_json().dump() << '\n';
    char name[64];
    std::snprintf(name, sizeof name, "%04zu.replay", i);
    write(fs::path(dir) / "replays" / name, r.replay.to_json().dump(2) + "\n");
    ++counts[static_cast<int>(r.kind)];
    universal += r.universal ? 1 : 0;
    max_rv = std::max(max_rv, r.RV);
    essential.insert(r.essential.begin(), r.essential.end());
  }
  write(fs::path(dir) / "violations.jsonl", jsonl.str());

  std::ostringstream csv;
  csv << "source_video,abstract_id,evaluations,violations,collision,traffic_disruption,rule_violation,universal,max_rv,"
         "essential\n";
  std::string ess;
  for (const auto& e : essential) ess += (ess.empty() ? "" : ";") + e;
  char rv[32];
  std::snprintf(rv, sizeof rv, "%.3f", max_rv);
  csv << source_video << ',' << abstract_id << ',' << run.outer.evaluations << ',' << run.records.size() << ','
      << counts[0] << ',' << counts[1] << ',' << counts[2] << ',' << universal << ',' << rv << ',' << ess << '\n';
  write(fs::path(dir) / "summary.csv", csv.str());
}

}  // namespace scenforge::search
