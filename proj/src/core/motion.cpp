// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "scenforge/motion.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

namespace scenforge {

using scenlang::Footprint;
using scenlang::LanePosition;
using scenlang::TrajectoryDef;

Footprint default_footprint(ParticipantType type) {
  switch (type) {
    case ParticipantType::car: return {4.7, 1.8};
    case ParticipantType::truck: return {8.0, 2.5};
    case ParticipantType::pedestrian: return {0.5, 0.5};
  }
  return {4.7, 1.8};
}

Footprint footprint_of(const TrajectoryDef& d) { return d.size ? *d.size : default_footprint(d.type); }

namespace {

constexpr double kSampleStep = 0.5;  // meters between path samples along lanes

void push_unique(std::vector<Vec2>& pts, Vec2 p) {
  if (pts.empty() || (pts.back() - p).norm() > 1e-9) pts.push_back(p);
}

}  // namespace

std::vector<Vec2> lane_path(const RoadMap& map, const LanePosition& from, double from_lateral,
                            const LanePosition& to, double to_lateral, int max_depth) {
  std::vector<std::string> chain;
  if (from.lane == to.lane && to.offset >= from.offset) {
    chain = {from.lane};
  } else {
    // Breadth-first search over successor links.
    std::map<std::string, std::string> parent;
    std::deque<std::pair<std::string, int>> queue{{from.lane, 0}};
    parent[from.lane] = "";
    bool found = false;
    while (!queue.empty() && !found) {
      auto [id, depth] = queue.front();
      queue.pop_front();
      if (depth >= max_depth) continue;
      for (const auto& next : map.lane(id).successors) {
        if (parent.count(next)) continue;
        parent[next] = id;
        if (next == to.lane) {
          found = true;
          break;
        }
        queue.emplace_back(next, depth + 1);
      }
    }
    if (!found) return {};
    for (std::string id = to.lane; !id.empty(); id = parent[id]) chain.push_back(id);
    std::reverse(chain.begin(), chain.end());
  }

  struct Piece {
    const Lane* lane;
    double s;
  };
  std::vector<Piece> samples;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const Lane& lane = map.lane(chain[i]);
    const double s0 = i == 0 ? from.offset : 0.0;
    const double s1 = i + 1 == chain.size() ? to.offset : lane.length();
    const int n = std::max(1, static_cast<int>(std::ceil((s1 - s0) / kSampleStep)));
    for (int k = 0; k <= n; ++k) samples.push_back({&lane, s0 + (s1 - s0) * k / n});
  }
  std::vector<double> cum(samples.size(), 0.0);
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const Vec2 a = samples[i - 1].lane->centerline.point_at(samples[i - 1].s);
    const Vec2 b = samples[i].lane->centerline.point_at(samples[i].s);
    cum[i] = cum[i - 1] + (b - a).norm();
  }
  const double total = cum.back();
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = total > 0.0 ? cum[i] / total : 0.0;
    const double lat = from_lateral + (to_lateral - from_lateral) * f;
    push_unique(out, map.world_point(samples[i].lane->id, samples[i].s, lat));
  }
  return out;
}

ScriptedMotion::ScriptedMotion(const TrajectoryDef& def, const RoadMap& map) {
  require(def.waypoints.size() >= 2, "trajectory '" + def.name + "' needs at least 2 waypoints");
  for (const auto& w : def.waypoints) points_.push_back(scenlang::resolve(w.position, w.lateral, map));
  double t = def.waypoints.front().time.value_or(0.0);
  times_.push_back(t);
  for (std::size_t i = 0; i + 1 < def.waypoints.size(); ++i) {
    const auto& a = def.waypoints[i];
    const auto& b = def.waypoints[i + 1];
    std::vector<Vec2> pts;
    const auto* la = std::get_if<LanePosition>(&a.position);
    const auto* lb = std::get_if<LanePosition>(&b.position);
    if (la && lb) pts = lane_path(map, *la, a.lateral.value_or(0.0), *lb, b.lateral.value_or(0.0));
    if (pts.empty()) {
      push_unique(pts, points_[i]);
      push_unique(pts, points_[i + 1]);
    }
    Leg leg;
    leg.path = Polyline(pts);
    leg.t0 = t;
    leg.v0 = a.speed;
    leg.v1 = b.speed;
    const double len = leg.path.length();
    if (b.time) {
      leg.duration = std::max(0.0, *b.time - t);
      leg.uniform = true;
      if (len > 0.0 && leg.duration <= 0.0) leg.duration = 1e-6;
    } else if (len <= 0.0) {
      leg.duration = 0.0;
    } else if (a.speed + b.speed > 0.0) {
      leg.duration = 2.0 * len / (a.speed + b.speed);
    } else {
      // Zero speed over a nonzero distance; feasibility reports it, motion crawls.
      leg.duration = len / 0.1;
      leg.uniform = true;
    }
    t += leg.duration;
    times_.push_back(t);
    legs_.push_back(std::move(leg));
  }
  initial_heading_ = 0.0;
  for (const auto& leg : legs_) {
    if (leg.path.length() > 0.0) {
      initial_heading_ = leg.path.heading_at(0.0);
      break;
    }
  }
}

double ScriptedMotion::distance_in_leg(const Leg& leg, double tau) const {
  const double len = leg.path.length();
  if (leg.duration <= 0.0) return len;
  tau = std::clamp(tau, 0.0, leg.duration);
  if (leg.uniform) return len * tau / leg.duration;
  const double a = (leg.v1 - leg.v0) / leg.duration;
  return std::min(len, leg.v0 * tau + 0.5 * a * tau * tau);
}

double ScriptedMotion::speed_in_leg(const Leg& leg, double tau) const {
  const double len = leg.path.length();
  if (len <= 0.0) return 0.0;
  if (leg.uniform) return leg.duration > 0.0 ? len / leg.duration : 0.0;
  tau = std::clamp(tau, 0.0, leg.duration);
  return leg.v0 + (leg.v1 - leg.v0) * tau / leg.duration;
}

ScriptedMotion::State ScriptedMotion::at(double t) const {
  State st;
  if (t <= times_.front()) {
    st.pos = points_.front();
    st.heading = initial_heading_;
    if (t < times_.front()) return st;
  }
  // Last leg whose start time is <= t.
  std::size_t idx = 0;
  for (std::size_t i = 0; i < legs_.size(); ++i)
    if (legs_[i].t0 <= t) idx = i;
  const Leg& leg = legs_[idx];
  const double tau = t - leg.t0;
  const double s = distance_in_leg(leg, tau);
  st.pos = leg.path.point_at(s);
  st.speed = t > end_time() + 1e-9 ? 0.0 : speed_in_leg(leg, tau);
  // Heading of this leg, or of the nearest moving leg for stationary holds.
  double heading = initial_heading_;
  bool found = false;
  if (leg.path.length() > 0.0) {
    heading = leg.path.heading_at(s);
    found = true;
  }
  for (std::size_t k = idx; !found && k-- > 0;) {
    if (legs_[k].path.length() > 0.0) {
      heading = legs_[k].path.heading_at(legs_[k].path.length());
      found = true;
    }
  }
  st.heading = heading;
  st.vel = unit_from_heading(heading) * st.speed;
  return st;
}

Trajectory ScriptedMotion::sample(double dt) const {
  require(dt > 0.0, "sample step must be positive");
  Trajectory out;
  const double end = end_time();
  const auto n = static_cast<long>(std::floor(end / dt + 1e-9));
  for (long k = 0; k <= n; ++k) {
    const double t = std::min(static_cast<double>(k) * dt, end);
    const State s = at(t);
    out.push_back({s.pos, s.vel, t});
  }
  if (out.empty() || end - out.back().t > 1e-9) {
    const State s = at(end);
    out.push_back({s.pos, s.vel, end});
  }
  return out;
}

}  // namespace scenforge
