// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>
#include <string>
#include <vector>

#include "scenforge/motion.hpp"
#include "scenforge/scenlang.hpp"

namespace scenforge::testing {

struct LabeledTrajectory {
  std::string name;
  RoadType road = RoadType::straight;
  ParticipantType type = ParticipantType::car;
  Action target = Action::follow_lane;
  ActionSequence expected;
  scenlang::TrajectoryDef def;
};

inline scenlang::Waypoint on_lane(const std::string& lane, double offset, double speed,
                                  std::optional<double> time = std::nullopt, std::optional<double> lateral = {}) {
  return {scenlang::LanePosition{lane, offset}, lateral, speed, time};
}

inline scenlang::Waypoint at_point(double x, double y, double speed, std::optional<double> time = std::nullopt) {
  return {Vec2{x, y}, std::nullopt, speed, time};
}

inline Trajectory realise(const scenlang::TrajectoryDef& def, const RoadMap& map, double dt = 0.1) {
  return ScriptedMotion(def, map).sample(dt);
}

/// One canonical trajectory per applicable (action, road type) pair on the
/// fixture map, labeled with the full expected action sequence.
inline std::vector<LabeledTrajectory> canonical_corpus() {
  using enum Action;
  using P = ParticipantType;
  std::vector<LabeledTrajectory> out;
  auto add = [&](std::string name, RoadType road, P type, Action target, ActionSequence expected,
                 std::vector<scenlang::Waypoint> wps) {
    scenlang::TrajectoryDef def{name, type, std::nullopt, std::move(wps)};
    out.push_back({std::move(name), road, type, target, std::move(expected), std::move(def)});
  };

  // Vehicle actions along a lane; `lane`, `left` and `right` are lanes of one road.
  struct Road {
    RoadType type;
    const char* tag;
    std::string lane, left, right;
  };
  const Road roads[] = {
      {RoadType::straight, "straight", "lane_222", "lane_223", "lane_221"},
      {RoadType::intersection, "intersection", "int_s_in1", "int_s_in2", "int_s_in0"},
      {RoadType::t_junction, "t_junction", "tj_w_in1", "tj_w_in2", "tj_w_in0"},
  };
  for (const Road& r : roads) {
    const std::string tag = r.tag;
    add(tag + "/follow_lane", r.type, P::car, follow_lane, {follow_lane},
        {on_lane(r.lane, 5, 10), on_lane(r.lane, 100, 10)});
    add(tag + "/change_left", r.type, P::car, change_left, {follow_lane, change_left, follow_lane},
        {on_lane(r.lane, 5, 10), on_lane(r.lane, 35, 10), on_lane(r.left, 75, 10), on_lane(r.left, 110, 10)});
    add(tag + "/change_right", r.type, P::truck, change_right, {follow_lane, change_right, follow_lane},
        {on_lane(r.lane, 5, 8), on_lane(r.lane, 35, 8), on_lane(r.right, 70, 8), on_lane(r.right, 110, 8)});
    add(tag + "/accelerate", r.type, P::car, accelerate, {accelerate},
        {on_lane(r.lane, 10, 2), on_lane(r.lane, 50, 10)});
    add(tag + "/decelerate", r.type, P::car, decelerate, {follow_lane, decelerate},
        {on_lane(r.lane, 5, 10), on_lane(r.lane, 45, 10), on_lane(r.lane, 95, 4)});
    add(tag + "/brake", r.type, P::car, brake, {follow_lane, brake},
        {on_lane(r.lane, 5, 10), on_lane(r.lane, 60, 10), on_lane(r.lane, 75, 0), on_lane(r.lane, 75, 0, 12.0)});
    add(tag + "/stop", r.type, P::car, stop, {follow_lane, stop},
        {on_lane(r.lane, 5, 8), on_lane(r.lane, 45, 8), on_lane(r.lane, 85, 0), on_lane(r.lane, 85, 0, 19.0)});
  }
  add("straight/drive_through", RoadType::straight, P::car, drive_through, {drive_through},
      {on_lane("lane_222", 100, 10), on_lane("lane_232", 60, 10)});
  add("straight/mixed", RoadType::straight, P::car, change_right, {follow_lane, decelerate, change_right, accelerate},
      {on_lane("lane_223", 5, 10), on_lane("lane_223", 35, 10), on_lane("lane_223", 65, 5), on_lane("lane_222", 95, 5),
       on_lane("lane_222", 125, 10)});
  add("straight/standing", RoadType::straight, P::car, stop, {stop},
      {on_lane("lane_221", 40, 0), on_lane("lane_221", 40, 0, 6.0)});

  // Junction maneuvers.
  add("intersection/turn_right", RoadType::intersection, P::car, turn_right, {follow_lane, turn_right, follow_lane},
      {on_lane("int_s_in0", 60, 8), on_lane("int_e_out0", 40, 8)});
  add("intersection/turn_left", RoadType::intersection, P::car, turn_left, {follow_lane, turn_left, follow_lane},
      {on_lane("int_s_in2", 60, 8), on_lane("int_w_out2", 40, 8)});
  add("intersection/cross", RoadType::intersection, P::truck, cross, {follow_lane, cross, follow_lane},
      {on_lane("int_s_in1", 60, 10), on_lane("int_n_out1", 40, 10)});
  add("t_junction/turn_right", RoadType::t_junction, P::car, turn_right, {follow_lane, turn_right, follow_lane},
      {on_lane("tj_s_in0", 60, 8), on_lane("tj_e_out0", 40, 8)});
  add("t_junction/turn_left", RoadType::t_junction, P::car, turn_left, {follow_lane, turn_left, follow_lane},
      {on_lane("tj_s_in2", 60, 8), on_lane("tj_w_out2", 40, 8)});
  add("t_junction/cross", RoadType::t_junction, P::car, cross, {follow_lane, cross, follow_lane},
      {on_lane("tj_w_in1", 60, 10), on_lane("tj_e_out1", 40, 10)});

  // Pedestrians beside and across each road type. `c` is a crossing line
  // perpendicular to the lanes, `along` a sidewalk parallel to them.
  struct Walk {
    RoadType type;
    const char* tag;
    Vec2 curb_a, curb_b;  // opposite curbs of the crossing
    Vec2 along_dir;       // lane direction
    Vec2 outward;         // away from the road at curb_a
  };
  const Walk walks[] = {
      {RoadType::straight, "straight", {50, -9}, {50, 9}, {1, 0}, {0, -1}},
      {RoadType::intersection, "intersection", {-16, 940}, {16, 940}, {0, 1}, {-1, 0}},
      {RoadType::t_junction, "t_junction", {920, 984}, {920, 1016}, {1, 0}, {0, -1}},
  };
  for (const Walk& w : walks) {
    const std::string tag = w.tag;
    const double cross_len = (w.curb_b - w.curb_a).norm();
    const Vec2 a = w.curb_a;
    const Vec2 b = w.curb_b;
    const Vec2 far = a + w.outward * 5.0;
    const Vec2 walk_end = a + w.along_dir * 28.0;
    add(tag + "/stand", w.type, P::pedestrian, stand, {stand}, {at_point(a.x, a.y, 0), at_point(a.x, a.y, 0, 5.0)});
    add(tag + "/walk_along", w.type, P::pedestrian, walk_along, {walk_along},
        {at_point(a.x, a.y, 1.4), at_point(walk_end.x, walk_end.y, 1.4)});
    add(tag + "/walk_across", w.type, P::pedestrian, walk_across, {walk_across},
        {at_point(far.x, far.y, 1.2), at_point(a.x, a.y, 1.2)});
    add(tag + "/cross", w.type, P::pedestrian, cross, {cross},
        {at_point(a.x, a.y, 1.4), at_point(b.x, b.y, 1.4)});
    add(tag + "/stand_cross", w.type, P::pedestrian, cross, {stand, cross},
        {at_point(a.x, a.y, 0, 0.0), at_point(a.x, a.y, 0, 3.0), at_point(b.x, b.y, 1.4, 3.0 + cross_len / 1.4)});
  }
  return out;
}

struct RandomLaneChange {
  Action direction = Action::change_left;
  scenlang::TrajectoryDef def;
};

/// Random follow / change / follow trajectories on the straight road and the
/// intersection approach lanes.
class LaneChangeGenerator {
 public:
  explicit LaneChangeGenerator(std::uint64_t seed) : rng_(seed) {}

  RandomLaneChange next() {
    static const char* const kRoads[][3] = {
        {"lane_221", "lane_222", "lane_223"},
        {"int_s_in0", "int_s_in1", "int_s_in2"},
        {"int_e_in0", "int_e_in1", "int_e_in2"},
        {"tj_w_in0", "tj_w_in1", "tj_w_in2"},
    };
    const auto& road = kRoads[pick(4)];
    const bool left = coin();
    const int from = left ? pick(2) : 1 + pick(2);
    const int to = left ? from + 1 : from - 1;
    const double speed = uniform(3.0, 13.9);
    const double s0 = uniform(2.0, 15.0);
    const double s1 = s0 + uniform(15.0, 30.0);
    const double s2 = s1 + uniform(20.0, 45.0);
    const double s3 = std::min(s2 + uniform(15.0, 30.0), 118.0);
    // Lateral placement within each lane stays fixed outside the maneuver.
    const double lat_from = uniform(-0.3, 0.3);
    const double lat_to = uniform(-0.3, 0.3);
    RandomLaneChange out;
    out.direction = left ? Action::change_left : Action::change_right;
    out.def = {"random", coin() ? ParticipantType::car : ParticipantType::truck, std::nullopt,
               {on_lane(road[from], s0, speed, std::nullopt, lat_from),
                on_lane(road[from], s1, speed, std::nullopt, lat_from),
                on_lane(road[to], s2, speed, std::nullopt, lat_to),
                on_lane(road[to], s3, speed, std::nullopt, lat_to)}};
    return out;
  }

 private:
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  bool coin() { return pick(2) == 1; }
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }

  std::mt19937_64 rng_;
};

}  // namespace scenforge::testing
