// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "scenforge/map.hpp"
#include "scenforge/motion.hpp"
#include "scenforge/scenlang.hpp"

namespace scenforge::sim {

struct EntityState {
  std::string id;
  ParticipantType type = ParticipantType::car;
  Vec2 pos;
  double heading = 0.0;
  double speed = 0.0;
  double half_length = 0.0;
  double half_width = 0.0;
  bool active = true;  // scripted participants leave after their last waypoint

  OrientedBox box() const { return {pos, heading, half_length, half_width}; }
  Vec2 velocity() const { return unit_from_heading(heading) * speed; }
};

/// entities[0] is the ego; the others follow in declaration order.
struct WorldState {
  double time = 0.0;
  std::vector<EntityState> entities;
};

enum class Termination : std::uint8_t { horizon, all_assertions_resolved, collision, policy_fault };
std::string_view to_string(Termination t);

struct ExecutionTrace {
  std::vector<WorldState> steps;
  std::map<std::string, Trajectory> trajectories;  // active samples per entity
  Termination termination = Termination::horizon;
  std::string fault;  // policy error message for policy_fault
  double dt = 0.1;
};

/// What the ego policy sees each step.
struct Observation {
  double time = 0.0;
  double dt = 0.1;
  EntityState ego;
  std::vector<EntityState> visible;  // active entities within the sensing radius
};

/// Unicycle command: speed is approached at bounded acceleration, curvature is clamped.
struct Command {
  double target_speed = 0.0;
  double curvature = 0.0;
};

struct PolicyContext {
  const RoadMap* map = nullptr;
  scenlang::EgoTask task;
  std::vector<RouteStep> route;  // empty when the destination is unreachable
  double clearance = 2.0;        // d_safe from the scenario's clearance assertion
  std::uint64_t seed = 0;
};

class EgoPolicy {
 public:
  virtual ~EgoPolicy() = default;
  virtual std::string name() const = 0;
  virtual void reset(const PolicyContext& ctx) = 0;
  virtual Command step(const Observation& obs) = 0;
};

struct PolicyOptions {
  double cruise_speed = 10.0;       // m/s, capped by the lane limit
  double static_speed = 0.7;        // v_static for lanekeeper-staticbug
  double static_buffer = 1.0;       // m, stop gap the staticbug keeps to static obstacles
  double overtake_ratio = 0.6;      // overtake leads slower than this fraction of cruise
  double junction_speed = 6.0;      // m/s through turning connectors
  double rear_accel_ignored = 0.3;  // m/s^2, lanekeeper-blindrear blind spot
  Trajectory script;                // for `scripted`
};

std::vector<std::string> builtin_policy_names();
/// Throws a usage error for unknown names.
std::unique_ptr<EgoPolicy> make_policy(const std::string& name, const PolicyOptions& opts = {});

struct SimOptions {
  double dt = 0.1;
  double horizon = 60.0;
  std::uint64_t seed = 0;
  double sensing_radius = 60.0;
  double max_accel = 4.0;      // m/s^2
  double max_curvature = 0.2;  // 1/m
  double collision_tolerance = 0.01;  // m of penetration ignored
};

/// Ego starts at rest at its start position, heading along the lane.
ExecutionTrace run_scenario(const scenlang::ConcreteScenario& s, const RoadMap& map, EgoPolicy& policy,
                            const SimOptions& opts = {});

/// Index pairs of overlapping active entities.
std::vector<std::pair<std::size_t, std::size_t>> detect_collision(const WorldState& state, double tolerance = 0.01);

enum class VerdictStatus : std::uint8_t { satisfied, violated };

struct Verdict {
  scenlang::Assertion assertion;
  VerdictStatus status = VerdictStatus::satisfied;
  std::optional<std::size_t> step;  // violation step, or the step that satisfied an eventually
  std::string detail;
};

/// One verdict per assertion. Clearance is measured boundary to boundary.
/// An eventually assertion still open when the trace ends is violated.
std::vector<Verdict> monitor_assertions(const ExecutionTrace& trace, const std::vector<scenlang::Assertion>& assertions,
                                        const Vec2& destination, double tolerance = 0.01);

/// Longest stretch (seconds) the ego spends below 0.1 m/s away from its destination.
double longest_stall(const ExecutionTrace& trace, const Vec2& destination, double radius);

/// Smallest boundary distance between the ego and any active entity per step.
std::vector<double> ego_clearances(const ExecutionTrace& trace);

/// One JSON object per line and step.
std::string trace_to_jsonl(const ExecutionTrace& trace);

/// Everything needed to re-run a simulation bit for bit.
struct Replay {
  std::string scenario;  // program text
  std::string policy;
  std::uint64_t seed = 0;
  double dt = 0.1;
  double horizon = 60.0;

  nlohmann::json to_json() const;
  static Replay from_json(const nlohmann::json& j);
};

Vec2 destination_of(const scenlang::ConcreteScenario& s, const RoadMap& map);

}  // namespace scenforge::sim
