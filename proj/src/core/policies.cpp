// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>

#include "scenforge/sim.hpp"

namespace scenforge::sim {

namespace {

constexpr double kComfortDecel = 3.0;   // m/s^2 used in stopping profiles
constexpr double kSwingRoom = 8.0;      // m of gap needed to pull out around a lead
constexpr double kLaneHalfCorridor = 2.25;

double pursuit_curvature(const EntityState& ego, Vec2 target) {
  const Vec2 d = target - ego.pos;
  const double dist = d.norm();
  if (dist < 1e-6) return 0.0;
  const double alpha = wrap_angle(std::atan2(d.y, d.x) - ego.heading);
  return 2.0 * std::sin(alpha) / dist;
}

/// Lanes joined end to end as one reference path.
struct Chain {
  std::vector<const Lane*> lanes;
  std::vector<double> starts;  // arc length at which each lane begins
  Polyline path;

  void build() {
    std::vector<Vec2> pts;
    starts.clear();
    double acc = 0.0;
    for (const Lane* l : lanes) {
      starts.push_back(acc);
      for (const Vec2& p : l->centerline.points())
        if (pts.empty() || (pts.back() - p).norm() > 1e-9) pts.push_back(p);
      acc += l->length();
    }
    path = Polyline(pts);
  }
  double length() const { return path.length(); }
  /// Point at arc length s, extended along the end tangent past the end.
  Vec2 point(double s) const {
    if (s <= length()) return path.point_at(std::max(0.0, s));
    return path.point_at(length()) + path.tangent_at(length()) * (s - length());
  }
};

class ScriptedPolicy final : public EgoPolicy {
 public:
  explicit ScriptedPolicy(Trajectory script) : script_(std::move(script)) {}
  std::string name() const override { return "scripted"; }
  void reset(const PolicyContext&) override {}

  Command step(const Observation& obs) override {
    if (script_.size() < 2) return {};
    const double t = obs.time + obs.dt;
    if (t > script_.back().t + 1e-9) return {};
    const Vec2 want = position_at(t);
    const Vec2 d = want - obs.ego.pos;
    const double dist = d.norm();
    if (dist < 1e-9) return {};
    const double alpha = wrap_angle(std::atan2(d.y, d.x) - obs.ego.heading);
    return {dist / obs.dt, 2.0 * alpha / dist};
  }

 private:
  Vec2 position_at(double t) const {
    auto it = std::lower_bound(script_.begin(), script_.end(), t,
                               [](const TrajectoryPoint& p, double v) { return p.t < v; });
    if (it == script_.begin()) return it->pos;
    if (it == script_.end()) return script_.back().pos;
    const auto& b = *it;
    const auto& a = *(it - 1);
    const double f = b.t > a.t ? (t - a.t) / (b.t - a.t) : 1.0;
    return lerp(a.pos, b.pos, f);
  }

  Trajectory script_;
};

enum class Flaw { none, staticbug, blindrear };

class LaneKeeper final : public EgoPolicy {
 public:
  LaneKeeper(Flaw flaw, PolicyOptions opts) : flaw_(flaw), opts_(std::move(opts)) {}

  std::string name() const override {
    switch (flaw_) {
      case Flaw::staticbug: return "lanekeeper-staticbug";
      case Flaw::blindrear: return "lanekeeper-blindrear";
      case Flaw::none: break;
    }
    return "lanekeeper";
  }

  void reset(const PolicyContext& ctx) override {
    ctx_ = ctx;
    idx_ = 0;
    overtaking_ = false;
    obstacle_.clear();
    arrived_ = false;
    prev_speed_.clear();
    accel_.clear();
  }

  Command step(const Observation& obs) override {
    update_accelerations(obs);
    if (ctx_.route.empty() || arrived_) return {0.0, 0.0};
    const RoadMap& map = *ctx_.map;
    const Vec2 dest = map.world_point(ctx_.task.destination.lane, ctx_.task.destination.offset);
    if ((obs.ego.pos - dest).norm() < 0.5 && obs.ego.speed < 0.5) {
      arrived_ = true;
      return {0.0, 0.0};
    }

    Chain route = route_chain();
    advance_route(obs, route);

    // Pending lane change on the route: take it when the gap allows.
    if (idx_ + 1 < ctx_.route.size()) {
      const auto via = ctx_.route[idx_ + 1].via;
      if (via == RouteEdge::lane_change_left || via == RouteEdge::lane_change_right) {
        Chain target;
        target.lanes = {&map.lane(ctx_.route[idx_ + 1].lane)};
        target.build();
        if (gap_free(obs, target)) {
          ++idx_;
          overtaking_ = false;
          route = route_chain();
        }
      }
    }

    const auto ego_on_route = route.path.project(obs.ego.pos);
    const double s_ego = ego_on_route.s;

    // Destination distance along the route.
    double d_dest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < route.lanes.size(); ++i)
      if (route.lanes[i]->id == ctx_.task.destination.lane && idx_ + i + 1 == ctx_.route.size())
        d_dest = route.starts[i] + ctx_.task.destination.offset - s_ego;

    // Lead on the current reference path.
    Chain ref = overtaking_ ? overtake_chain(route) : route;
    if (overtaking_ && ref.lanes.empty()) {
      overtaking_ = false;
      ref = route;
    }
    const auto ego_on_ref = ref.path.project(obs.ego.pos);
    const Lead lead = find_lead(obs, ref, ego_on_ref.s, ego_on_ref.lateral);

    const bool is_static = lead.found && flaw_ == Flaw::staticbug && !lead.pedestrian && lead.speed < opts_.static_speed;
    const double cruise = std::min(opts_.cruise_speed, route.lanes.front()->speed_limit);

    // Overtake decisions.
    if (!overtaking_ && lead.found && !lead.pedestrian && !is_static &&
        lead.speed < opts_.overtake_ratio * cruise && lead.gap >= kSwingRoom && lead.gap < 40.0 &&
        can_overtake(route, s_ego, lead, d_dest)) {
      Chain left = overtake_chain(route);
      if (!left.lanes.empty() && gap_free(obs, left)) {
        overtaking_ = true;
        obstacle_ = lead.id;
      }
    } else if (overtaking_ && passed_obstacle(obs, route, s_ego) && gap_free(obs, route)) {
      overtaking_ = false;
      obstacle_.clear();
    }
    if (overtaking_) ref = overtake_chain(route);
    if (ref.lanes.empty()) ref = route;

    const auto on_ref = ref.path.project(obs.ego.pos);
    const Lead ahead = find_lead(obs, ref, on_ref.s, on_ref.lateral);

    // Speed plan.
    double v = cruise;
    v = std::min(v, junction_limit(ref, on_ref.s));
    if (std::isfinite(d_dest)) v = std::min(v, std::sqrt(2.0 * kComfortDecel * 0.66 * std::max(0.0, d_dest - 0.2)));
    if (ahead.found) {
      double lead_v = std::max(0.0, ahead.speed);
      double stop_gap = ctx_.clearance + 1.0;
      // Hang back far enough to pull out around a slow lead later.
      if (!overtaking_ && !ahead.pedestrian && ahead.speed < opts_.overtake_ratio * cruise)
        stop_gap = std::max(stop_gap, kSwingRoom);
      if (flaw_ == Flaw::staticbug && !ahead.pedestrian && ahead.speed < opts_.static_speed) {
        lead_v = 0.0;
        stop_gap = opts_.static_buffer;
      }
      if (ahead.pedestrian) lead_v = 0.0;
      v = std::min(v, lead_v + std::sqrt(2.0 * kComfortDecel * std::max(0.0, ahead.gap - stop_gap)));
      if (ahead.gap <= stop_gap) v = std::min(v, lead_v * 0.5);
    }

    // Until the ego is clear of its lane, the lead being overtaken still binds.
    if (overtaking_) {
      const Lead orig = find_lead(obs, route, s_ego, ego_on_route.lateral);
      if (orig.found && orig.id == obstacle_ && std::abs(ego_on_route.lateral) < 3.0)
        v = std::min(v, std::max(0.0, orig.speed) +
                            std::sqrt(2.0 * kComfortDecel * std::max(0.0, orig.gap - ctx_.clearance - 1.0)));
    }

    const double lookahead = std::max(8.0, 1.5 * obs.ego.speed);
    return {v, pursuit_curvature(obs.ego, ref.point(on_ref.s + lookahead))};
  }

 private:
  struct Lead {
    bool found = false;
    std::string id;
    double gap = 0.0;    // boundary gap along the path
    double speed = 0.0;  // along the path
    double s = 0.0;
    bool pedestrian = false;
  };

  Chain route_chain() const {
    Chain c;
    const RoadMap& map = *ctx_.map;
    c.lanes.push_back(&map.lane(ctx_.route[idx_].lane));
    for (std::size_t i = idx_ + 1; i < ctx_.route.size(); ++i) {
      const auto via = ctx_.route[i].via;
      if (via != RouteEdge::follow && via != RouteEdge::junction) break;
      c.lanes.push_back(&map.lane(ctx_.route[i].lane));
    }
    // Continue straight ahead past the route end so lookahead stays on the road.
    for (int extra = 0; extra < 2; ++extra) {
      const Lane* last = c.lanes.back();
      if (last->successors.empty()) break;
      if (idx_ + c.lanes.size() < ctx_.route.size()) break;
      c.lanes.push_back(&map.lane(last->successors.front()));
    }
    c.build();
    return c;
  }

  Chain overtake_chain(const Chain& route) const {
    Chain c;
    const RoadMap& map = *ctx_.map;
    for (const Lane* l : route.lanes) {
      if (l->junction || !l->left_neighbor) break;
      const Lane* left = &map.lane(*l->left_neighbor);
      if (!c.lanes.empty()) {
        const auto& succ = c.lanes.back()->successors;
        if (std::find(succ.begin(), succ.end(), left->id) == succ.end()) break;
      }
      c.lanes.push_back(left);
    }
    if (!c.lanes.empty()) c.build();
    return c;
  }

  void advance_route(const Observation& obs, Chain& route) {
    while (route.lanes.size() > 1 && idx_ + 1 < ctx_.route.size()) {
      const auto via = ctx_.route[idx_ + 1].via;
      if (via != RouteEdge::follow && via != RouteEdge::junction) break;
      if (route.path.project(obs.ego.pos).s < route.starts[1] - 0.01) break;
      ++idx_;
      route = route_chain();
    }
  }

  void update_accelerations(const Observation& obs) {
    std::map<std::string, double> now;
    accel_.clear();
    for (const auto& e : obs.visible) {
      now[e.id] = e.speed;
      if (auto it = prev_speed_.find(e.id); it != prev_speed_.end())
        accel_[e.id] = (e.speed - it->second) / obs.dt;
    }
    prev_speed_ = std::move(now);
  }

  Lead find_lead(const Observation& obs, const Chain& ref, double s_ego, double lat_ego) const {
    Lead best;
    for (const auto& e : obs.visible) {
      const auto p = ref.path.project(e.pos);
      if (p.s <= s_ego) continue;
      if (p.s >= ref.length() - 1e-6 && p.distance > kLaneHalfCorridor) continue;
      const bool in_lane = std::abs(p.lateral) < kLaneHalfCorridor;
      const bool in_body = std::abs(p.lateral - lat_ego) < obs.ego.half_width + e.half_width + 0.3;
      if (!in_lane && !in_body) continue;
      const double gap = p.s - s_ego - obs.ego.half_length - e.half_length;
      if (best.found && gap >= best.gap) continue;
      best.found = true;
      best.id = e.id;
      best.gap = gap;
      best.s = p.s;
      best.speed = e.velocity().dot(ref.path.tangent_at(p.s));
      best.pedestrian = e.type == ParticipantType::pedestrian;
    }
    return best;
  }

  bool gap_free(const Observation& obs, const Chain& lane_chain) const {
    // Include the lane feeding the target so vehicles still upstream count.
    Chain target = lane_chain;
    for (const Lane* p : ctx_.map->predecessors(target.lanes.front()->id)) {
      if (p->junction) continue;
      target.lanes.insert(target.lanes.begin(), p);
      target.build();
      break;
    }
    const auto me = target.path.project(obs.ego.pos);
    for (const auto& e : obs.visible) {
      if (e.type == ParticipantType::pedestrian) continue;
      const auto p = target.path.project(e.pos);
      if (std::abs(p.lateral) > kLaneHalfCorridor + 0.25 || p.distance > kLaneHalfCorridor + 0.25) continue;
      const double rel = p.s - me.s;
      const double v_e = e.velocity().dot(target.path.tangent_at(p.s));
      double a_e = 0.0;
      if (rel < 0.0) {
        const auto it = accel_.find(e.id);
        if (it == accel_.end()) return false;  // no acceleration estimate yet
        if (flaw_ == Flaw::blindrear && it->second > opts_.rear_accel_ignored) continue;
        a_e = std::max(0.0, it->second);
      }
      const double lengths = obs.ego.half_length + e.half_length;
      if (std::abs(rel) - lengths < 5.0) return false;
      // Both keep their current acceleration trend; faster traffic from behind is followed longer.
      const double limit = target.lanes.back()->speed_limit;
      const double horizon = rel < 0.0 ? 12.0 : 6.0;
      for (double tau = 0.5; tau <= horizon + 1e-9; tau += 0.5) {
        const double x_e = rel + travel(v_e, a_e, limit, tau);
        const double x_me = travel(obs.ego.speed, 2.0, std::min(opts_.cruise_speed, limit), tau);
        if (std::abs(x_e - x_me) - lengths < 4.0 || (rel < 0.0) != (x_e < x_me)) return false;
      }
    }
    return true;
  }

  static double travel(double v0, double a, double v_max, double tau) {
    if (a <= 0.0 || v0 >= v_max) return v0 * tau;
    const double t_cap = (v_max - v0) / a;
    if (tau <= t_cap) return v0 * tau + 0.5 * a * tau * tau;
    return v0 * t_cap + 0.5 * a * t_cap * t_cap + v_max * (tau - t_cap);
  }

  bool can_overtake(const Chain& route, double s_ego, const Lead& lead, double d_dest) const {
    // Enough straight road (no junction, no destination) to pass and return.
    const double needed = lead.gap + 2.0 * 5.0 + 45.0;
    if (d_dest < needed) return false;
    for (std::size_t i = 0; i < route.lanes.size(); ++i)
      if (route.lanes[i]->junction && route.starts[i] - s_ego < needed) return false;
    return route.length() - s_ego >= needed || std::isfinite(d_dest);
  }

  bool passed_obstacle(const Observation& obs, const Chain& route, double s_ego) const {
    for (const auto& e : obs.visible) {
      if (e.id != obstacle_) continue;
      const double s_obs = route.path.project(e.pos).s;
      return s_ego - s_obs > obs.ego.half_length + e.half_length + 8.0;
    }
    return true;  // gone from view or from the world
  }

  double junction_limit(const Chain& ref, double s_ego) const {
    double v = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ref.lanes.size(); ++i) {
      const Lane* l = ref.lanes[i];
      if (!l->junction || ctx_.map->junction_turn(*l) == Action::cross) continue;
      const double start = ref.starts[i];
      const double end = start + l->length();
      if (s_ego >= end) continue;
      const double d = std::max(0.0, start - s_ego);
      v = std::min(v, std::sqrt(opts_.junction_speed * opts_.junction_speed + 2.0 * 2.0 * d));
    }
    return v;
  }

  Flaw flaw_;
  PolicyOptions opts_;
  PolicyContext ctx_;
  std::size_t idx_ = 0;
  bool overtaking_ = false;
  std::string obstacle_;
  bool arrived_ = false;
  std::map<std::string, double> prev_speed_;
  std::map<std::string, double> accel_;
};

}  // namespace

std::vector<std::string> builtin_policy_names() {
  return {"scripted", "lanekeeper", "lanekeeper-staticbug", "lanekeeper-blindrear"};
}

std::unique_ptr<EgoPolicy> make_policy(const std::string& name, const PolicyOptions& opts) {
  if (name == "scripted") return std::make_unique<ScriptedPolicy>(opts.script);
  if (name == "lanekeeper") return std::make_unique<LaneKeeper>(Flaw::none, opts);
  if (name == "lanekeeper-staticbug") return std::make_unique<LaneKeeper>(Flaw::staticbug, opts);
  if (name == "lanekeeper-blindrear") return std::make_unique<LaneKeeper>(Flaw::blindrear, opts);
  fail(ErrorKind::usage, "unknown policy '" + name + "'");
}

}  // namespace scenforge::sim
