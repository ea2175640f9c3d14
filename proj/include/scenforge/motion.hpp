// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "scenforge/geometry.hpp"
#include "scenforge/map.hpp"
#include "scenforge/scenlang.hpp"

namespace scenforge {

/// Sampled motion of one participant.
struct TrajectoryPoint {
  Vec2 pos;
  Vec2 vel;
  double t = 0.0;
};
using Trajectory = std::vector<TrajectoryPoint>;

/// Default footprint (length x width) per participant type.
scenlang::Footprint default_footprint(ParticipantType type);
scenlang::Footprint footprint_of(const scenlang::TrajectoryDef& d);

/// Kinematics of a scripted participant. Between waypoints the path follows
/// lane centerlines when both ends lie on the same lane or on a successor
/// chain, and a straight line otherwise. Speed ramps linearly in time from
/// one waypoint's speed to the next; legs whose end waypoint carries an
/// explicit time are traversed at uniform speed.
class ScriptedMotion {
 public:
  ScriptedMotion(const scenlang::TrajectoryDef& def, const RoadMap& map);

  struct State {
    Vec2 pos;
    double heading = 0.0;
    double speed = 0.0;
    Vec2 vel;
  };

  double start_time() const { return times_.front(); }
  double end_time() const { return times_.back(); }
  /// Present in the world from time 0 until its last waypoint is reached.
  bool active(double t) const { return t <= end_time() + 1e-9; }
  /// State at time `t`, clamped to the scripted interval.
  State at(double t) const;
  const std::vector<double>& waypoint_times() const { return times_; }
  /// Positions of the waypoints in world coordinates.
  const std::vector<Vec2>& waypoint_positions() const { return points_; }
  /// Samples every `dt` seconds from time 0 to the end, plus the end itself.
  Trajectory sample(double dt) const;

 private:
  struct Leg {
    Polyline path;
    double t0 = 0.0;
    double duration = 0.0;
    double v0 = 0.0;
    double v1 = 0.0;
    bool uniform = false;
  };
  double distance_in_leg(const Leg& leg, double tau) const;
  double speed_in_leg(const Leg& leg, double tau) const;

  std::vector<Leg> legs_;
  std::vector<double> times_;
  std::vector<Vec2> points_;
  double initial_heading_ = 0.0;
};

/// Lane-following path between two lane positions through the successor
/// graph (no lane changes); empty when unreachable within `max_depth` lanes.
std::vector<Vec2> lane_path(const RoadMap& map, const scenlang::LanePosition& from, double from_lateral,
                            const scenlang::LanePosition& to, double to_lateral, int max_depth = 4);

}  // namespace scenforge
