// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "scenforge/abstraction.hpp"
#include "scenforge/map.hpp"
#include "scenforge/metrics.hpp"
#include "scenforge/scenlang.hpp"
#include "scenforge/sim.hpp"

namespace scenforge::search {

struct SearchConfig {
  int outer_budget = 200;  // simulations in the outer layer, seeds included
  int inner_budget = 20;   // variations per forwarded violation
  double sigma_pos = 5.0;      // m
  double sigma_speed = 1.5;    // m/s
  double type_flip_prob = 0.1;
  double M = 10.0;             // m, universality threshold on RV
  std::uint64_t seed = 42;
  int population = 5;
  int offspring = 5;
  int resamples = 10;           // mutation attempts before falling back to the parent
  double inner_sigma_scale = 0.5;
  double stuck_speed = 0.5;     // m/s
  double stuck_seconds = 15.0;
  int threads = 0;              // 0 = hardware concurrency
  sim::SimOptions sim;
  sim::PolicyOptions policy;
  metrics::CostModel costs;

  /// Throws a usage error when a field is out of range.
  void validate() const;
};

enum class ViolationKind : std::uint8_t { collision, traffic_disruption, rule_violation };
std::string_view to_string(ViolationKind k);
std::optional<ViolationKind> violation_kind_from_string(std::string_view s);

struct Candidate {
  scenlang::ConcreteScenario scenario;
  std::optional<double> D;  // set for simulated, equivalent candidates
  std::vector<sim::Verdict> verdicts;
  bool equivalent = false;
  ActionSequence ego_actions;             // extracted from the ego's realised trajectory
  std::optional<ViolationKind> violation;
  std::size_t evaluation = 0;             // 0-based simulation index within the run

  bool violated() const;
};

/// The ego's declared behaviors. Throws a precondition error without an ego.
ActionSequence human_action_sequence(const abstraction::AbstractScenario& a);

/// Gaussian perturbation of every non-ego participant. Inner mode scales the
/// sigmas by inner_sigma_scale and never flips types. Returns the parent when
/// no resample passes feasibility and semantic equivalence.
scenlang::ConcreteScenario mutate_scenario(const scenlang::ConcreteScenario& s, const abstraction::AbstractScenario& a,
                                           const RoadMap& map, const SearchConfig& config, std::mt19937_64& rng,
                                           bool inner = false);

/// Priority: collision, then a destination miss with the ego stuck, then
/// clearance. Empty when the violated verdicts fit none of these (a missed
/// destination while still moving). Throws a precondition error when no
/// verdict is violated.
std::optional<ViolationKind> classify_violation(const std::vector<sim::Verdict>& verdicts,
                                                const sim::ExecutionTrace& trace, const SearchConfig& config = {});

/// Longest contiguous stretch (s) the ego spends below `speed`.
double longest_slow_stretch(const sim::ExecutionTrace& trace, double speed);

/// Simulates, monitors and scores one scenario. Throws a domain error when
/// the scenario is infeasible.
Candidate evaluate(const scenlang::ConcreteScenario& s, const abstraction::AbstractScenario& a, const RoadMap& map,
                   const std::string& policy, const SearchConfig& config);

struct OuterResult {
  std::vector<Candidate> population;  // best first
  std::vector<Candidate> violations;  // distinct classified violations, in evaluation order
  std::vector<Candidate> evaluated;   // every simulation, in evaluation order
  std::size_t evaluations = 0;

  const Candidate& best() const { return population.front(); }
};

OuterResult outer_search(const abstraction::AbstractScenario& a, const std::vector<scenlang::ConcreteScenario>& seeds,
                         const RoadMap& map, const std::string& policy, const SearchConfig& config);

/// Non-ego participant paths of the scripted motion.
metrics::ScenarioPaths scenario_paths(const scenlang::ConcreteScenario& s, const RoadMap& map);

struct InnerResult {
  ViolationKind kind = ViolationKind::collision;
  double RV = 0.0;
  bool universal = false;
  std::vector<scenlang::ConcreteScenario> Z;
  std::size_t evaluations = 0;
};

/// `stream` separates the random streams of different violations in one run.
/// Throws a precondition error when the scenario does not reproduce a violation.
InnerResult inner_search(const scenlang::ConcreteScenario& violation, const abstraction::AbstractScenario& a,
                         const RoadMap& map, const std::string& policy, const SearchConfig& config,
                         std::uint64_t stream = 0);

/// Participants whose removal alone makes the violation kind disappear.
std::vector<std::string> minimize_essential(const scenlang::ConcreteScenario& violation, const RoadMap& map,
                                            const std::string& policy, const SearchConfig& config);

struct ViolationRecord {
  std::string abstract_id;
  std::string source_video;
  sim::Replay replay;
  ViolationKind kind = ViolationKind::collision;
  double D = 0.0;
  double RV = 0.0;
  bool universal = false;
  std::vector<std::string> essential;
  std::vector<std::string> variations;  // program text of Z
  std::size_t evaluation = 0;

  nlohmann::json to_json() const;
  static ViolationRecord from_json(const nlohmann::json& j);
};

struct SearchRun {
  OuterResult outer;
  std::vector<ViolationRecord> records;
};

/// Seed scenarios generated from the abstract; throws a domain error when none is feasible.
std::vector<scenlang::ConcreteScenario> seed_scenarios(const abstraction::AbstractScenario& a, const RoadMap& map,
                                                       const SearchConfig& config);

/// Outer search, then inner search and minimization for every violation.
SearchRun run_search(const abstraction::AbstractScenario& a, const RoadMap& map, const std::string& policy,
                     const SearchConfig& config, const std::string& source_video = "");

/// violations.jsonl, replays/<n>.replay and summary.csv under `dir`.
void write_outputs(const std::string& dir, const SearchRun& run, const std::string& abstract_id,
                   const std::string& source_video);

}  // namespace scenforge::search
