// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "scenforge/map.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numbers>
#include <queue>
#include <set>

namespace scenforge {

using nlohmann::json;

RoadMap::RoadMap(std::string id, std::vector<Lane> lanes) : id_(std::move(id)), lanes_(std::move(lanes)) {
  for (std::size_t i = 0; i < lanes_.size(); ++i) {
    if (!index_.emplace(lanes_[i].id, i).second) {
      fail(ErrorKind::parse, "duplicate lane id '" + lanes_[i].id + "'");
    }
    if (lanes_[i].centerline.points().size() < 2) {
      fail(ErrorKind::parse, "lane '" + lanes_[i].id + "' needs at least two centerline points");
    }
  }
  for (const Lane& l : lanes_) {
    for (const auto* ref : {&l.left_neighbor, &l.right_neighbor}) {
      if (*ref && !find(**ref)) {
        fail(ErrorKind::parse, "lane '" + l.id + "' references unknown neighbour '" + **ref + "'");
      }
    }
    for (const auto& s : l.successors) {
      if (!find(s)) fail(ErrorKind::parse, "lane '" + l.id + "' references unknown successor '" + s + "'");
    }
  }
  // Roads: connected components of the neighbour relation, named by the
  // smallest lane id in the component.
  for (const Lane& l : lanes_) {
    if (road_.count(l.id)) continue;
    std::vector<std::string> stack{l.id};
    std::set<std::string> comp;
    while (!stack.empty()) {
      std::string cur = stack.back();
      stack.pop_back();
      if (!comp.insert(cur).second) continue;
      const Lane& c = lanes_[index_.at(cur)];
      if (c.left_neighbor) stack.push_back(*c.left_neighbor);
      if (c.right_neighbor) stack.push_back(*c.right_neighbor);
    }
    const std::string name = "road:" + *comp.begin();
    for (const auto& m : comp) road_[m] = name;
  }
}

RoadMap RoadMap::from_json(const json& j) {
  try {
    std::vector<Lane> lanes;
    for (const auto& jl : j.at("lanes")) {
      Lane l;
      l.id = jl.at("id").get<std::string>();
      std::vector<Vec2> pts;
      for (const auto& p : jl.at("centerline")) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      l.centerline = Polyline(std::move(pts));
      l.width = jl.value("width", 3.5);
      l.speed_limit = jl.value("speed_limit", 13.9);
      if (jl.contains("left_neighbor") && !jl["left_neighbor"].is_null()) {
        l.left_neighbor = jl["left_neighbor"].get<std::string>();
      }
      if (jl.contains("right_neighbor") && !jl["right_neighbor"].is_null()) {
        l.right_neighbor = jl["right_neighbor"].get<std::string>();
      }
      if (jl.contains("successors")) l.successors = jl["successors"].get<std::vector<std::string>>();
      const auto rt = road_type_from_string(jl.value("road_type", std::string("straight")));
      if (!rt) fail(ErrorKind::parse, "lane '" + l.id + "' has unknown road_type");
      l.road_type = *rt;
      l.segment = jl.value("segment", std::string("seg_") + std::string(to_string(l.road_type)));
      l.junction = jl.value("junction", false);
      lanes.push_back(std::move(l));
    }
    return RoadMap(j.value("id", std::string("map")), std::move(lanes));
  } catch (const json::exception& e) {
    fail(ErrorKind::parse, std::string("malformed map JSON: ") + e.what());
  }
}

RoadMap RoadMap::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open map file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::parse, "map file '" + path + "': " + e.what());
  }
  return from_json(j);
}

json RoadMap::to_json() const {
  json lanes = json::array();
  for (const Lane& l : lanes_) {
    json pts = json::array();
    for (const Vec2& p : l.centerline.points()) pts.push_back({p.x, p.y});
    lanes.push_back({{"id", l.id},
                     {"centerline", pts},
                     {"width", l.width},
                     {"speed_limit", l.speed_limit},
                     {"left_neighbor", l.left_neighbor ? json(*l.left_neighbor) : json(nullptr)},
                     {"right_neighbor", l.right_neighbor ? json(*l.right_neighbor) : json(nullptr)},
                     {"successors", l.successors},
                     {"road_type", std::string(to_string(l.road_type))},
                     {"segment", l.segment},
                     {"junction", l.junction}});
  }
  return {{"id", id_}, {"lanes", lanes}};
}

const Lane* RoadMap::find(const std::string& lane_id) const {
  const auto it = index_.find(lane_id);
  return it == index_.end() ? nullptr : &lanes_[it->second];
}

const Lane& RoadMap::lane(const std::string& lane_id) const {
  const Lane* l = find(lane_id);
  if (!l) fail(ErrorKind::domain, "unknown lane '" + lane_id + "'");
  return *l;
}

std::vector<const Lane*> RoadMap::predecessors(const std::string& lane_id) const {
  std::vector<const Lane*> out;
  for (const Lane& l : lanes_) {
    if (std::find(l.successors.begin(), l.successors.end(), lane_id) != l.successors.end()) {
      out.push_back(&l);
    }
  }
  return out;
}

const std::string& RoadMap::road_of(const std::string& lane_id) const {
  const auto it = road_.find(lane_id);
  if (it == road_.end()) fail(ErrorKind::domain, "unknown lane '" + lane_id + "'");
  return it->second;
}

std::vector<std::string> RoadMap::segments(std::optional<RoadType> type) const {
  std::set<std::string> out;
  for (const Lane& l : lanes_) {
    if (!type || l.road_type == *type) out.insert(l.segment);
  }
  return {out.begin(), out.end()};
}

std::vector<const Lane*> RoadMap::segment_lanes(const std::string& segment) const {
  std::vector<const Lane*> out;
  for (const Lane& l : lanes_) {
    if (l.segment == segment) out.push_back(&l);
  }
  std::sort(out.begin(), out.end(), [](const Lane* a, const Lane* b) { return a->id < b->id; });
  return out;
}

Vec2 RoadMap::world_point(const std::string& lane_id, double offset, double lateral) const {
  const Lane& l = lane(lane_id);
  const Vec2 base = l.centerline.point_at(offset);
  return base + l.centerline.tangent_at(offset).left() * lateral;
}

std::vector<LaneHit> RoadMap::locate_all(Vec2 p, std::optional<double> heading) const {
  std::vector<LaneHit> hits;
  for (const Lane& l : lanes_) {
    const auto pr = l.centerline.project(p);
    LaneHit h{&l, pr.s, pr.lateral, pr.distance, false};
    const bool within_extent = pr.s > 1e-9 || (p - l.centerline.points().front()).dot(l.centerline.tangent_at(0.0)) >= -1e-9;
    const bool within_end = pr.s < l.length() - 1e-9 ||
                            (p - l.centerline.points().back()).dot(l.centerline.tangent_at(l.length())) <= 1e-9;
    h.inside = std::abs(pr.lateral) <= l.width / 2.0 + 1e-9 && pr.distance <= l.width / 2.0 + 1e-9 &&
               within_extent && within_end;
    hits.push_back(h);
  }
  auto misaligned = [&](const LaneHit& h) {
    if (!heading) return false;
    const double d = wrap_angle(*heading - h.lane->centerline.heading_at(h.s));
    return std::abs(d) > std::numbers::pi / 3.0;
  };
  std::stable_sort(hits.begin(), hits.end(), [&](const LaneHit& a, const LaneHit& b) {
    if (a.inside != b.inside) return a.inside;
    const bool ma = misaligned(a), mb = misaligned(b);
    if (ma != mb) return !ma;
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.lane->id < b.lane->id;
  });
  return hits;
}

std::optional<LaneHit> RoadMap::locate(Vec2 p, std::optional<double> heading) const {
  auto hits = locate_all(p, heading);
  if (hits.empty()) return std::nullopt;
  return hits.front();
}

Action RoadMap::junction_turn(const Lane& connector) const {
  const double d = wrap_angle(connector.centerline.heading_at(connector.length()) -
                              connector.centerline.heading_at(0.0));
  const double deg = d * 180.0 / std::numbers::pi;
  if (deg > 45.0) return Action::turn_left;
  if (deg < -45.0) return Action::turn_right;
  return Action::cross;
}

std::vector<RouteStep> RoadMap::shortest_route(const std::string& from_lane, double from_offset,
                                               const std::string& to_lane, double to_offset) const {
  (void)lane(from_lane);
  (void)lane(to_lane);
  constexpr double kLaneChangeCost = 10.0;
  // Lane changes get dearer the further along the route they happen, so
  // routes settle into their lane before a junction rather than after it.
  constexpr double kLateChangeWeight = 0.1;
  struct Node {
    double cost;
    std::string lane;
    double offset;  // offset at which the lane is entered
  };
  std::map<std::string, double> best;
  std::map<std::string, std::pair<std::string, RouteEdge>> parent;
  std::map<std::string, double> entry;
  auto cmp = [](const Node& a, const Node& b) {
    if (a.cost != b.cost) return a.cost > b.cost;
    return a.lane > b.lane;
  };
  std::priority_queue<Node, std::vector<Node>, decltype(cmp)> open(cmp);
  open.push({0.0, from_lane, from_offset});
  best[from_lane] = 0.0;
  entry[from_lane] = from_offset;
  parent[from_lane] = {"", RouteEdge::start};
  std::set<std::string> closed;
  double goal_cost = std::numeric_limits<double>::infinity();
  while (!open.empty()) {
    Node n = open.top();
    open.pop();
    if (closed.count(n.lane)) continue;
    closed.insert(n.lane);
    const Lane& l = lane(n.lane);
    if (n.lane == to_lane && to_offset >= n.offset - 1e-6) {
      goal_cost = n.cost + (to_offset - n.offset);
      break;
    }
    auto relax = [&](const std::string& next, double cost, double offset, RouteEdge via) {
      if (closed.count(next)) return;
      auto it = best.find(next);
      if (it != best.end() && it->second <= cost) return;
      best[next] = cost;
      entry[next] = offset;
      parent[next] = {n.lane, via};
      open.push({cost, next, offset});
    };
    for (const auto& s : l.successors) {
      const Lane& nl = lane(s);
      relax(s, n.cost + (l.length() - n.offset), 0.0,
            nl.junction ? RouteEdge::junction : RouteEdge::follow);
    }
    const Vec2 here = l.centerline.point_at(n.offset);
    if (l.left_neighbor) {
      const double off = lane(*l.left_neighbor).centerline.project(here).s;
      relax(*l.left_neighbor, n.cost + kLaneChangeCost + kLateChangeWeight * n.cost, off, RouteEdge::lane_change_left);
    }
    if (l.right_neighbor) {
      const double off = lane(*l.right_neighbor).centerline.project(here).s;
      relax(*l.right_neighbor, n.cost + kLaneChangeCost + kLateChangeWeight * n.cost, off, RouteEdge::lane_change_right);
    }
  }
  if (!std::isfinite(goal_cost)) return {};
  std::vector<RouteStep> route;
  for (std::string cur = to_lane; !cur.empty();) {
    const auto& [prev, via] = parent.at(cur);
    route.push_back({cur, via});
    cur = prev;
  }
  std::reverse(route.begin(), route.end());
  return route;
}

ActionSequence RoadMap::route_maneuvers(const std::vector<RouteStep>& route) const {
  ActionSequence out;
  for (const RouteStep& step : route) {
    switch (step.via) {
      case RouteEdge::lane_change_left: out.push_back(Action::change_left); break;
      case RouteEdge::lane_change_right: out.push_back(Action::change_right); break;
      case RouteEdge::junction: out.push_back(junction_turn(lane(step.lane))); break;
      default: break;
    }
  }
  return out;
}

}  // namespace scenforge
