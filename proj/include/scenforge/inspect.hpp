// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scenforge/abstraction.hpp"
#include "scenforge/map.hpp"
#include "scenforge/motion.hpp"
#include "scenforge/scenlang.hpp"

namespace scenforge::inspect {

enum class Constraint : std::uint8_t { heading, spatial, speed, temporal };
std::string_view to_string(Constraint c);

struct FeasibilityDiagnostic {
  Constraint constraint = Constraint::heading;
  std::string participant;
  std::string detail;
};

struct FeasibilityReport {
  std::vector<FeasibilityDiagnostic> diagnostics;
  bool feasible() const { return diagnostics.empty(); }
};

struct FeasibilityOptions {
  double min_spacing = 5.0;     // meters between initial footprints
  double temporal_slack = 0.2;  // allowed excess of required over declared speed
};

FeasibilityReport check_feasibility(const scenlang::ConcreteScenario& s, const RoadMap& map,
                                    const FeasibilityOptions& opts = {});

struct InspectOptions {
  double sample_interval = 0.5;    // s, resampling step before segmentation
  double tau_position = 0.5;       // m, interpolation deviation threshold
  double tau_velocity = 0.5;       // m/s
  double stationary_speed = 0.1;   // m/s
  double lateral_speed = 0.3;      // m/s relative to the lane
  double threshold_c = 0.5;        // m/s^2, speed-change rate gate
  double brake_decel = 3.0;        // m/s^2
  double brake_end_speed = 0.5;    // m/s
  double min_duration = 1.0;       // s, shorter runs are absorbed; also stop/stand minimum
  double bbox_tolerance = 0.3;     // m
  double walk_angle = 30.0;        // deg, parallel / perpendicular tolerance
};

enum class Regime : std::uint8_t {
  steady,
  accelerating,
  decelerating,
  stationary,
  halt,  // deceleration that ends standing or below the brake end speed
  lateral,
  junction,
  walk_along,
  walk_across,
  walk_oblique,
};
std::string_view to_string(Regime r);

struct MotionSegment {
  std::size_t start_index = 0;  // into Segmentation::samples; consecutive segments share endpoints
  std::size_t end_index = 0;
  std::vector<std::string> lanes;  // lanes traversed, in order, without repeats
  Regime regime = Regime::steady;
  std::size_t decel_end_index = 0;  // halt segments: last sample of the deceleration
  double max_deviation = 0.0;       // largest interpolation deviation at an interior sample
};

struct Segmentation {
  Trajectory samples;  // the trajectory resampled at the inspection interval
  std::vector<std::string> sample_lanes;  // containing lane per sample, "" when off-road
  std::vector<MotionSegment> segments;
};

/// Splits a trajectory at motion regime changes (stationary, lateral
/// movement relative to the lane, speed changes at or above threshold_c,
/// junction traversal). Fewer than 3 waypoints yield a single segment.
Segmentation segment_motions(const Trajectory& traj, const RoadMap& map, ParticipantType type,
                             const InspectOptions& opts = {});

/// Evaluates the action specifications on one segment in priority order:
/// lane transitions, turns, cross, longitudinal actions, follow_lane /
/// drive_through. Empty when no specification holds.
std::optional<Action> classify_action(const Segmentation& seg, std::size_t index, const RoadMap& map,
                                      ParticipantType type, const InspectOptions& opts = {});

struct ActionExtraction {
  ActionSequence actions;
  std::vector<std::string> diagnostics;  // unclassified segments
};

ActionExtraction extract_action_sequence(const Trajectory& traj, const RoadMap& map, ParticipantType type,
                                         const InspectOptions& opts = {});

/// Lane-change bearing of a velocity in the lane-local frame, degrees in
/// [0, 360): the direction of travel maps to 90 and the left normal to 180.
double lane_bearing(Vec2 velocity, Vec2 lane_tangent);

struct ParticipantDiff {
  std::string participant;
  ActionSequence expected;
  ActionSequence actual;
  std::vector<std::string> diagnostics;
};

struct EquivalenceResult {
  bool equivalent = false;
  std::vector<ParticipantDiff> diffs;  // only participants that differ
  FeasibilityReport feasibility;
};

/// Realised trajectories by participant name; scripted motion is sampled
/// for participants not present.
using TrajectorySet = std::map<std::string, Trajectory>;

/// Participants are paired with the abstract by role and declaration order.
/// The ego's lane-graph route must imply the ego's maneuver behaviors.
/// Throws a precondition error on participant count mismatch.
EquivalenceResult check_semantic_equivalence(const scenlang::ConcreteScenario& s,
                                             const abstraction::AbstractScenario& a, const RoadMap& map,
                                             const TrajectorySet& realised = {},
                                             const InspectOptions& opts = {});

/// change_*, turn_* and cross entries of a behavior list, in order.
ActionSequence maneuvers_of(const ActionSequence& behaviors);

}  // namespace scenforge::inspect
