// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "scenforge/common.hpp"
#include "scenforge/geometry.hpp"
#include "scenforge/map.hpp"

namespace scenforge::scenlang {

struct LanePosition {
  std::string lane;
  double offset = 0.0;  // meters along the lane from its start

  bool operator==(const LanePosition&) const = default;
};

using WaypointPosition = std::variant<LanePosition, Vec2>;

struct Waypoint {
  WaypointPosition position;
  std::optional<double> lateral;  // meters, positive to the left; lane positions only
  double speed = 0.0;             // m/s at this waypoint
  std::optional<double> time;     // explicit arrival time in seconds

  bool operator==(const Waypoint&) const = default;
};

struct Footprint {
  double length = 0.0;
  double width = 0.0;

  bool operator==(const Footprint&) const = default;
};

struct EgoTask {
  ParticipantType type = ParticipantType::car;
  LanePosition start;
  LanePosition destination;

  bool operator==(const EgoTask&) const = default;
};

struct TrajectoryDef {
  std::string name;
  ParticipantType type = ParticipantType::car;
  std::optional<Footprint> size;
  std::vector<Waypoint> waypoints;

  bool operator==(const TrajectoryDef&) const = default;
};

enum class AssertionKind { never_collision, always_clearance, eventually_at_destination };

struct Assertion {
  AssertionKind kind = AssertionKind::never_collision;
  double clearance = 0.0;  // always_clearance: d_safe in meters
  double within = 0.0;     // eventually: deadline in seconds
  double radius = 0.0;     // eventually: destination radius in meters

  bool operator==(const Assertion&) const = default;

  static Assertion never_collision() { return {AssertionKind::never_collision, 0.0, 0.0, 0.0}; }
  static Assertion always_clearance(double d) { return {AssertionKind::always_clearance, d, 0.0, 0.0}; }
  static Assertion eventually_at_destination(double t, double r) {
    return {AssertionKind::eventually_at_destination, 0.0, t, r};
  }
};

struct AssertionDefaults {
  double clearance = 2.0;
  double within = 60.0;
  double radius = 3.0;
};

/// never(collision), always(clearance >= d), eventually_within(T, destination r).
std::vector<Assertion> default_assertions(const AssertionDefaults& d = {});

struct ConcreteScenario {
  std::string map_id;
  EgoTask ego;
  std::vector<TrajectoryDef> npcs;
  std::vector<TrajectoryDef> pedestrians;
  std::vector<Assertion> assertions;

  bool operator==(const ConcreteScenario&) const = default;

  /// NPCs followed by pedestrians, in declaration order.
  std::vector<const TrajectoryDef*> participants() const;
  const TrajectoryDef* find(std::string_view name) const;
  bool remove(std::string_view name);
};

struct Diagnostic {
  int line = 0;    // 1-based; 0 when not tied to a text position
  int column = 0;
  std::string message;

  std::string str() const;
};

struct ParseResult {
  std::optional<ConcreteScenario> scenario;  // set only when diagnostics is empty
  std::vector<Diagnostic> diagnostics;
};

/// Never throws; malformed input yields diagnostics and no scenario.
ParseResult parse_scenario(std::string_view text);

/// Throws Error(parse) carrying every diagnostic.
ConcreteScenario parse_scenario_or_throw(std::string_view text);

std::string print_scenario(const ConcreteScenario& s);

/// Lane references and offsets checked against a map; empty means valid.
std::vector<Diagnostic> validate_refs(const ConcreteScenario& s, const RoadMap& map);

/// World position of a waypoint (lane positions resolved through the map).
Vec2 resolve(const WaypointPosition& p, std::optional<double> lateral, const RoadMap& map);

/// True when `name` can be printed without quoting.
bool is_identifier(std::string_view name);

}  // namespace scenforge::scenlang
