// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "scenforge/common.hpp"
#include "scenforge/geometry.hpp"

namespace scenforge {

/// A directed lane; traffic flows along the centerline in point order.
struct Lane {
  std::string id;
  Polyline centerline;
  double width = 3.5;
  double speed_limit = 13.9;
  std::optional<std::string> left_neighbor;
  std::optional<std::string> right_neighbor;
  std::vector<std::string> successors;
  RoadType road_type = RoadType::straight;
  std::string segment;    // lane group the lane belongs to
  bool junction = false;  // connector lane inside a junction box

  double length() const { return centerline.length(); }
};

/// Maneuver implied by one step of a lane-graph route.
enum class RouteEdge { start, follow, lane_change_left, lane_change_right, junction };

struct RouteStep {
  std::string lane;
  RouteEdge via = RouteEdge::start;
};

struct LaneHit {
  const Lane* lane = nullptr;
  double s = 0.0;
  double lateral = 0.0;
  double distance = 0.0;
  bool inside = false;  // within the lane's width and extent
};

class RoadMap {
 public:
  RoadMap() = default;
  RoadMap(std::string id, std::vector<Lane> lanes);

  static RoadMap from_json(const nlohmann::json& j);
  static RoadMap load(const std::string& path);
  nlohmann::json to_json() const;

  const std::string& id() const { return id_; }
  const std::vector<Lane>& lanes() const { return lanes_; }
  const Lane* find(const std::string& lane_id) const;
  /// Throws a domain error for unknown ids.
  const Lane& lane(const std::string& lane_id) const;

  std::vector<const Lane*> predecessors(const std::string& lane_id) const;

  /// Identifier of the road (maximal set of same-direction neighbouring lanes).
  const std::string& road_of(const std::string& lane_id) const;

  /// Segment ids sorted ascending, restricted to `type` when given.
  std::vector<std::string> segments(std::optional<RoadType> type = std::nullopt) const;
  std::vector<const Lane*> segment_lanes(const std::string& segment) const;

  Vec2 world_point(const std::string& lane_id, double offset, double lateral = 0.0) const;

  /// Lanes containing `p`, best first. When `heading` is given, lanes whose
  /// direction differs by more than 60 degrees rank below aligned lanes.
  std::vector<LaneHit> locate_all(Vec2 p, std::optional<double> heading = std::nullopt) const;
  /// Best containing lane, else nearest lane.
  std::optional<LaneHit> locate(Vec2 p, std::optional<double> heading = std::nullopt) const;

  /// Kind of turn made by a junction connector, judged by its heading change.
  Action junction_turn(const Lane& connector) const;

  /// Shortest lane-graph route; lane changes are allowed between
  /// same-direction neighbours. Empty when unreachable.
  std::vector<RouteStep> shortest_route(const std::string& from_lane, double from_offset,
                                        const std::string& to_lane, double to_offset) const;

  /// Maneuvers (change_left, change_right, turn_left, turn_right, cross)
  /// implied by a route.
  ActionSequence route_maneuvers(const std::vector<RouteStep>& route) const;

 private:
  std::string id_;
  std::vector<Lane> lanes_;
  std::map<std::string, std::size_t> index_;
  std::map<std::string, std::string> road_;
};

}  // namespace scenforge
