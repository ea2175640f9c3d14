// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "scenforge/inspect.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace scenforge::inspect {

using scenlang::ConcreteScenario;
using scenlang::LanePosition;
using scenlang::TrajectoryDef;

std::string_view to_string(Constraint c) {
  switch (c) {
    case Constraint::heading: return "heading";
    case Constraint::spatial: return "spatial";
    case Constraint::speed: return "speed";
    case Constraint::temporal: return "temporal";
  }
  return "?";
}

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::steady: return "steady";
    case Regime::accelerating: return "accelerating";
    case Regime::decelerating: return "decelerating";
    case Regime::stationary: return "stationary";
    case Regime::halt: return "halt";
    case Regime::lateral: return "lateral";
    case Regime::junction: return "junction";
    case Regime::walk_along: return "walk_along";
    case Regime::walk_across: return "walk_across";
    case Regime::walk_oblique: return "walk_oblique";
  }
  return "?";
}

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

std::string num(double v, int precision = 2) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(precision);
  s << v;
  return s.str();
}

double lane_heading_at(const Lane& lane, Vec2 p) { return lane.centerline.heading_at(lane.centerline.project(p).s); }

scenlang::Footprint ego_footprint(const ConcreteScenario& s) { return default_footprint(s.ego.type); }

OrientedBox box_at(Vec2 c, double heading, const scenlang::Footprint& f) {
  return {c, heading, f.length / 2.0, f.width / 2.0};
}

}  // namespace

FeasibilityReport check_feasibility(const ConcreteScenario& s, const RoadMap& map, const FeasibilityOptions& opts) {
  FeasibilityReport rep;
  auto diag = [&](Constraint c, const std::string& who, const std::string& detail) {
    rep.diagnostics.push_back({c, who, detail});
  };

  // Unresolvable references make every other check meaningless.
  if (const auto refs = scenlang::validate_refs(s, map); !refs.empty()) {
    for (const auto& d : refs) diag(Constraint::heading, "scenario", d.message);
    return rep;
  }

  // (1) heading: ego route must exist along lane directions.
  if (map.shortest_route(s.ego.start.lane, s.ego.start.offset, s.ego.destination.lane, s.ego.destination.offset)
          .empty())
    diag(Constraint::heading, "ego", "destination is not reachable along lane directions");

  struct Start {
    std::string name;
    OrientedBox box;
  };
  std::vector<Start> starts;
  {
    const Lane& lane = map.lane(s.ego.start.lane);
    starts.push_back({"ego", box_at(map.world_point(lane.id, s.ego.start.offset),
                                    lane.centerline.heading_at(s.ego.start.offset), ego_footprint(s))});
  }

  for (const TrajectoryDef* t : s.participants()) {
    const bool vehicle = t->type != ParticipantType::pedestrian;
    ScriptedMotion motion(*t, map);

    // (1) heading: vehicles never move against the lanes they occupy.
    if (vehicle) {
      bool reported = false;
      for (const auto& p : motion.sample(0.5)) {
        if (reported || p.vel.norm() < 0.1) continue;
        bool inside_any = false, aligned = false;
        for (const auto& h : map.locate_all(p.pos)) {
          if (!h.inside) break;
          inside_any = true;
          if (p.vel.dot(h.lane->centerline.tangent_at(h.s)) > 0.0) aligned = true;
        }
        if (inside_any && !aligned) {
          diag(Constraint::heading, t->name,
               "moves against the lane direction at t=" + num(p.t, 1) + " s");
          reported = true;
        }
      }
    }

    // (3) speed limits.
    for (std::size_t i = 0; i < t->waypoints.size(); ++i) {
      const auto& w = t->waypoints[i];
      double limit = -1.0;
      if (const auto* lp = std::get_if<LanePosition>(&w.position)) {
        limit = map.lane(lp->lane).speed_limit;
      } else {
        for (const auto& h : map.locate_all(std::get<Vec2>(w.position))) {
          if (!h.inside) break;
          limit = std::max(limit, h.lane->speed_limit);
        }
      }
      if (limit >= 0.0 && w.speed > limit + 1e-9)
        diag(Constraint::speed, t->name,
             "waypoint " + std::to_string(i) + " speed " + num(w.speed) + " m/s exceeds limit " + num(limit) +
                 " m/s");
    }

    // (4) temporal ordering and kinematic reachability.
    const auto& times = motion.waypoint_times();
    const auto& pts = motion.waypoint_positions();
    double arrival = t->waypoints.front().time.value_or(0.0);
    for (std::size_t i = 0; i + 1 < t->waypoints.size(); ++i) {
      const auto& a = t->waypoints[i];
      const auto& b = t->waypoints[i + 1];
      const double dist = times[i + 1] > times[i] || b.time ? (pts[i + 1] - pts[i]).norm() : 0.0;
      const double leg_len = std::max(dist, (pts[i + 1] - pts[i]).norm());
      if (b.time) {
        const double dt = *b.time - arrival;
        if (dt <= 0.0 && leg_len > 0.0) {
          diag(Constraint::temporal, t->name, "waypoint " + std::to_string(i + 1) + " time is not after its predecessor");
        } else if (dt > 0.0) {
          const double required = leg_len / dt;
          const double allowed = std::max(a.speed, b.speed) * (1.0 + opts.temporal_slack);
          if (required > allowed + 1e-9)
            diag(Constraint::temporal, t->name,
                 "leg " + std::to_string(i) + " needs " + num(required) + " m/s but allows " + num(allowed) +
                     " m/s");
        }
        arrival = *b.time;
      } else {
        if (leg_len > 0.0 && a.speed + b.speed <= 0.0)
          diag(Constraint::temporal, t->name, "leg " + std::to_string(i) + " covers distance at zero speed");
        arrival = times[i + 1];
      }
    }

    const auto st = motion.at(0.0);
    starts.push_back({t->name, box_at(st.pos, st.heading, footprint_of(*t))});
  }

  // (2) spatial: pairwise initial separation.
  for (std::size_t i = 0; i < starts.size(); ++i) {
    for (std::size_t j = i + 1; j < starts.size(); ++j) {
      const double d = box_distance(starts[i].box, starts[j].box);
      if (d < opts.min_spacing)
        diag(Constraint::spatial, starts[j].name,
             "starts " + num(d) + " m from " + starts[i].name + " (minimum " + num(opts.min_spacing, 1) + " m)");
    }
  }
  return rep;
}

double lane_bearing(Vec2 velocity, Vec2 lane_tangent) {
  const double lon = velocity.dot(lane_tangent);
  const double lat = lane_tangent.cross(velocity);
  double b = 90.0 + std::atan2(lat, lon) * kDeg;
  if (b < 0.0) b += 360.0;
  if (b >= 360.0) b -= 360.0;
  return b;
}

namespace {

Trajectory resample(const Trajectory& traj, double step) {
  Trajectory out;
  const double t0 = traj.front().t, t1 = traj.back().t;
  std::size_t j = 0;
  auto interp = [&](double t) {
    while (j + 1 < traj.size() && traj[j + 1].t < t) ++j;
    if (j + 1 >= traj.size()) return traj.back();
    const auto& a = traj[j];
    const auto& b = traj[j + 1];
    const double f = b.t > a.t ? std::clamp((t - a.t) / (b.t - a.t), 0.0, 1.0) : 1.0;
    return TrajectoryPoint{lerp(a.pos, b.pos, f), lerp(a.vel, b.vel, f), t};
  };
  const auto n = static_cast<long>(std::floor((t1 - t0) / step + 1e-9));
  for (long k = 0; k <= n; ++k) out.push_back(interp(t0 + k * step));
  if (t1 - out.back().t > 1e-6) out.push_back(traj.back());
  return out;
}

double speed(const TrajectoryPoint& p) { return p.vel.norm(); }

struct Run {
  std::size_t start;
  std::size_t end;
  Regime regime;
  std::size_t decel_end = 0;
};

double duration(const Trajectory& s, const Run& r) { return s[r.end].t - s[r.start].t; }

}  // namespace

Segmentation segment_motions(const Trajectory& traj, const RoadMap& map, ParticipantType type,
                             const InspectOptions& opts) {
  require(!traj.empty(), "trajectory is empty");
  for (std::size_t i = 1; i < traj.size(); ++i)
    require(traj[i].t > traj[i - 1].t, "trajectory timestamps must increase strictly");
  Segmentation seg;
  seg.samples = traj.size() >= 2 ? resample(traj, opts.sample_interval) : traj;
  const Trajectory& s = seg.samples;
  const std::size_t n = s.size();
  const bool pedestrian = type == ParticipantType::pedestrian;

  // Lane context per sample; headings come from the velocity, carried over while stationary.
  std::vector<const Lane*> lanes(n, nullptr);
  std::vector<double> headings(n, 0.0);
  {
    std::optional<double> h;
    for (std::size_t i = 0; i < n; ++i)
      if (speed(s[i]) >= opts.stationary_speed) {
        h = std::atan2(s[i].vel.y, s[i].vel.x);
        break;
      }
    for (std::size_t i = 0; i < n; ++i) {
      if (speed(s[i]) >= opts.stationary_speed) h = std::atan2(s[i].vel.y, s[i].vel.x);
      headings[i] = h.value_or(0.0);
      const auto hit = map.locate(s[i].pos, pedestrian ? std::nullopt : h);
      if (hit && hit->inside) lanes[i] = hit->lane;
    }
  }
  seg.sample_lanes.resize(n);
  for (std::size_t i = 0; i < n; ++i) seg.sample_lanes[i] = lanes[i] ? lanes[i]->id : "";

  auto make_segment = [&](std::size_t a, std::size_t b, Regime r, std::size_t decel_end) {
    MotionSegment m;
    m.start_index = a;
    m.end_index = b;
    m.regime = r;
    m.decel_end_index = decel_end;
    for (std::size_t i = a; i <= b; ++i)
      if (lanes[i] && (m.lanes.empty() || m.lanes.back() != lanes[i]->id)) m.lanes.push_back(lanes[i]->id);
    for (std::size_t i = std::max<std::size_t>(a, 1); i < b && i + 1 < n; ++i) {
      const Vec2 dp = s[i].pos - (s[i - 1].pos + s[i + 1].pos) * 0.5;
      const Vec2 dv = s[i].vel - (s[i - 1].vel + s[i + 1].vel) * 0.5;
      m.max_deviation = std::max(m.max_deviation, dp.norm() + dv.norm());
    }
    return m;
  };

  if (n < 3) {
    Regime r = Regime::steady;
    if (std::all_of(s.begin(), s.end(), [&](const auto& p) { return speed(p) < opts.stationary_speed; }))
      r = Regime::stationary;
    seg.segments.push_back(make_segment(0, n - 1, r, 0));
    return seg;
  }

  // Label each interval between consecutive samples.
  std::vector<Regime> label(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto& a = s[i];
    const auto& b = s[i + 1];
    const double va = speed(a), vb = speed(b);
    const double dt = b.t - a.t;
    if (va < opts.stationary_speed && vb < opts.stationary_speed) {
      label[i] = Regime::stationary;
      continue;
    }
    if (pedestrian) {
      const Vec2 v = (b.pos - a.pos) * (1.0 / dt);
      const auto hit = map.locate((a.pos + b.pos) * 0.5);
      double angle = 0.0;
      if (hit) {
        const double lane_h = hit->lane->centerline.heading_at(hit->s);
        angle = std::abs(wrap_angle(std::atan2(v.y, v.x) - lane_h)) * kDeg;
        if (angle > 90.0) angle = 180.0 - angle;
      }
      label[i] = angle <= opts.walk_angle          ? Regime::walk_along
                 : angle >= 90.0 - opts.walk_angle ? Regime::walk_across
                                                   : Regime::walk_oblique;
      continue;
    }
    if ((lanes[i] && lanes[i]->junction) || (lanes[i + 1] && lanes[i + 1]->junction)) {
      label[i] = Regime::junction;
      continue;
    }
    auto lateral = [&](std::size_t k) {
      if (!lanes[k]) return 0.0;
      const Vec2 tan = lanes[k]->centerline.tangent_at(lanes[k]->centerline.project(s[k].pos).s);
      return tan.cross(s[k].vel);
    };
    const double vlat = 0.5 * (lateral(i) + lateral(i + 1));
    const double acc = (vb - va) / dt;
    if (std::abs(vlat) > opts.lateral_speed)
      label[i] = Regime::lateral;
    else if (acc >= opts.threshold_c)
      label[i] = Regime::accelerating;
    else if (acc <= -opts.threshold_c)
      label[i] = Regime::decelerating;
    else
      label[i] = Regime::steady;
  }

  std::vector<Run> runs;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!runs.empty() && runs.back().regime == label[i])
      runs.back().end = i + 1;
    else
      runs.push_back({i, i + 1, label[i], 0});
  }

  // A deceleration that comes to rest (or ends the trajectory below the brake
  // end speed) is one halting maneuver together with the standing that follows.
  if (!pedestrian) {
    std::vector<Run> merged;
    for (std::size_t k = 0; k < runs.size(); ++k) {
      Run r = runs[k];
      if (r.regime == Regime::decelerating && speed(s[r.end]) < opts.brake_end_speed) {
        r.regime = Regime::halt;
        r.decel_end = r.end;
        if (k + 1 < runs.size() && runs[k + 1].regime == Regime::stationary) r.end = runs[++k].end;
      }
      merged.push_back(r);
    }
    runs = std::move(merged);
  }

  // Absorb short runs into the longer neighbour; junction and halt runs stay.
  auto absorbable = [&](const Run& r) {
    return r.regime != Regime::junction && r.regime != Regime::halt && duration(s, r) < opts.min_duration - 1e-9;
  };
  while (runs.size() > 1) {
    std::size_t best = runs.size();
    for (std::size_t k = 0; k < runs.size(); ++k)
      if (absorbable(runs[k]) && (best == runs.size() || duration(s, runs[k]) < duration(s, runs[best]))) best = k;
    if (best == runs.size()) break;
    const bool has_prev = best > 0, has_next = best + 1 < runs.size();
    if (has_prev && has_next && runs[best - 1].regime == runs[best + 1].regime) {
      runs[best - 1].end = runs[best + 1].end;
      runs.erase(runs.begin() + static_cast<long>(best), runs.begin() + static_cast<long>(best) + 2);
      continue;
    }
    bool into_prev = has_prev;
    if (has_prev && has_next) into_prev = duration(s, runs[best - 1]) >= duration(s, runs[best + 1]);
    if (into_prev) {
      runs[best - 1].end = runs[best].end;
    } else {
      runs[best + 1].start = runs[best].start;
    }
    runs.erase(runs.begin() + static_cast<long>(best));
    // Neighbours of equal regime now touch; join them.
    for (std::size_t k = 1; k < runs.size();) {
      if (runs[k].regime == runs[k - 1].regime && runs[k].regime != Regime::halt) {
        runs[k - 1].end = runs[k].end;
        runs.erase(runs.begin() + static_cast<long>(k));
      } else {
        ++k;
      }
    }
  }

  for (const Run& r : runs) seg.segments.push_back(make_segment(r.start, r.end, r.regime, r.decel_end));
  return seg;
}

namespace {

// Lanes left (+1) or right (-1) of `from` on the same road, by neighbour links.
int side_of(const RoadMap& map, const Lane& from, const Lane& to) {
  const Lane* cur = &from;
  while (cur->left_neighbor) {
    cur = &map.lane(*cur->left_neighbor);
    if (cur->id == to.id) return 1;
  }
  cur = &from;
  while (cur->right_neighbor) {
    cur = &map.lane(*cur->right_neighbor);
    if (cur->id == to.id) return -1;
  }
  return 0;
}

bool successor_chain(const RoadMap& map, const std::vector<std::string>& lanes) {
  for (std::size_t i = 1; i < lanes.size(); ++i) {
    const auto& succ = map.lane(lanes[i - 1]).successors;
    if (std::find(succ.begin(), succ.end(), lanes[i]) == succ.end()) return false;
  }
  return true;
}

bool traverses_lane(const RoadMap& map, Vec2 a, Vec2 b) {
  for (const Lane& lane : map.lanes()) {
    const auto pa = lane.centerline.project(a);
    const auto pb = lane.centerline.project(b);
    const double half = lane.width / 2.0;
    if (pa.s <= 0.0 || pa.s >= lane.length() || pb.s <= 0.0 || pb.s >= lane.length()) continue;
    if ((pa.lateral >= half && pb.lateral <= -half) || (pa.lateral <= -half && pb.lateral >= half)) return true;
  }
  return false;
}

}  // namespace

std::optional<Action> classify_action(const Segmentation& seg, std::size_t index, const RoadMap& map,
                                      ParticipantType type, const InspectOptions& opts) {
  require(index < seg.segments.size(), "segment index out of range");
  const MotionSegment& m = seg.segments[index];
  const Trajectory& s = seg.samples;
  const TrajectoryPoint& first = s[m.start_index];
  const TrajectoryPoint& last = s[m.end_index];
  const double dur = last.t - first.t;
  const double v0 = speed(first), v1 = speed(last);
  const double rate = dur > 0.0 ? (v1 - v0) / dur : 0.0;
  const bool speed_steady = std::abs(rate) < opts.threshold_c;
  auto lane_at = [&](std::size_t i) -> const Lane* {
    return seg.sample_lanes[i].empty() ? nullptr : map.find(seg.sample_lanes[i]);
  };

  if (type == ParticipantType::pedestrian) {
    switch (m.regime) {
      case Regime::stationary: return Action::stand;
      case Regime::walk_across:
        return traverses_lane(map, first.pos, last.pos) ? Action::cross : Action::walk_across;
      case Regime::walk_along: return Action::walk_along;
      default: return std::nullopt;
    }
  }

  // Lane transitions.
  const Lane* l0 = lane_at(m.start_index);
  const Lane* l1 = lane_at(m.end_index);
  if (l0 && l1 && l0 != l1 && !l0->junction && !l1->junction && speed_steady) {
    const int side = side_of(map, *l0, *l1);
    if (side != 0) {
      // Driving-position spec in the start lane's frame.
      const auto p0 = l0->centerline.project(first.pos);
      const auto p1 = l0->centerline.project(last.pos);
      const double smin = std::min(p0.s, p1.s) - opts.bbox_tolerance;
      const double smax = std::max(p0.s, p1.s) + opts.bbox_tolerance;
      const double lmin = std::min(p0.lateral, p1.lateral) - opts.bbox_tolerance;
      const double lmax = std::max(p0.lateral, p1.lateral) + opts.bbox_tolerance;
      bool inside = true;
      Vec2 mean_vel;
      for (std::size_t i = m.start_index; i <= m.end_index; ++i) {
        const auto p = l0->centerline.project(s[i].pos);
        if (p.s < smin || p.s > smax || p.lateral < lmin || p.lateral > lmax) inside = false;
        mean_vel = mean_vel + s[i].vel;
      }
      const double bearing = lane_bearing(mean_vel, l0->centerline.tangent_at(p0.s));
      if (inside && side > 0 && bearing > 90.0 && bearing < 180.0) return Action::change_left;
      if (inside && side < 0 && bearing > 0.0 && bearing < 90.0) return Action::change_right;
    }
  }

  // Turns and crossing through a junction.
  bool through_junction = false;
  for (std::size_t i = m.start_index; i <= m.end_index; ++i)
    if (const Lane* l = lane_at(i); l && l->junction) through_junction = true;
  if (through_junction && speed_steady) {
    auto heading_at = [&](std::size_t i) {
      if (speed(s[i]) >= opts.stationary_speed) return std::atan2(s[i].vel.y, s[i].vel.x);
      if (const Lane* l = lane_at(i)) return lane_heading_at(*l, s[i].pos);
      return 0.0;
    };
    const double turn = wrap_angle(heading_at(m.end_index) - heading_at(m.start_index)) * kDeg;
    if (turn > 45.0 && turn < 135.0) return Action::turn_left;
    if (turn < -45.0 && turn > -135.0) return Action::turn_right;
    if (std::abs(turn) < 45.0) return Action::cross;
  }

  // Longitudinal actions.
  if (m.regime == Regime::halt) {
    const double decel_dur = s[m.decel_end_index].t - first.t;
    const double decel_rate = decel_dur > 0.0 ? (speed(s[m.decel_end_index]) - v0) / decel_dur : 0.0;
    const double standing = last.t - s[m.decel_end_index].t;
    if (decel_rate <= -opts.brake_decel) return Action::brake;
    if (standing >= opts.min_duration - 1e-9) return Action::stop;
    return Action::decelerate;
  }
  if (m.regime == Regime::stationary) return Action::stop;
  if (rate >= opts.threshold_c) return Action::accelerate;
  if (rate <= -opts.threshold_c) {
    if (rate <= -opts.brake_decel && v1 < opts.brake_end_speed) return Action::brake;
    return Action::decelerate;
  }

  // Lane following.
  if (m.lanes.size() <= 1) return Action::follow_lane;
  if (successor_chain(map, m.lanes)) {
    const bool any_junction = std::any_of(m.lanes.begin(), m.lanes.end(),
                                          [&](const std::string& id) { return map.lane(id).junction; });
    if (!any_junction) return Action::drive_through;
  }
  return std::nullopt;
}

ActionExtraction extract_action_sequence(const Trajectory& traj, const RoadMap& map, ParticipantType type,
                                         const InspectOptions& opts) {
  require(!traj.empty(), "trajectory is empty");
  const Segmentation seg = segment_motions(traj, map, type, opts);
  ActionExtraction out;
  for (std::size_t i = 0; i < seg.segments.size(); ++i) {
    const auto a = classify_action(seg, i, map, type, opts);
    if (!a) {
      const auto& m = seg.segments[i];
      out.diagnostics.push_back("unclassified " + std::string(to_string(m.regime)) + " segment t=" +
                                num(seg.samples[m.start_index].t, 1) + ".." + num(seg.samples[m.end_index].t, 1) +
                                " s");
      continue;
    }
    if (out.actions.empty() || out.actions.back() != *a) out.actions.push_back(*a);
  }
  return out;
}

ActionSequence maneuvers_of(const ActionSequence& behaviors) {
  ActionSequence out;
  for (Action a : behaviors)
    if (a == Action::change_left || a == Action::change_right || a == Action::turn_left ||
        a == Action::turn_right || a == Action::cross)
      out.push_back(a);
  return out;
}

EquivalenceResult check_semantic_equivalence(const ConcreteScenario& s, const abstraction::AbstractScenario& a,
                                             const RoadMap& map, const TrajectorySet& realised,
                                             const InspectOptions& opts) {
  using abstraction::Role;
  const auto npc_specs = a.with_role(Role::npc);
  const auto ped_specs = a.with_role(Role::pedestrian);
  require(npc_specs.size() == s.npcs.size(),
          "participant count mismatch: abstract has " + std::to_string(npc_specs.size()) + " npcs, scenario has " +
              std::to_string(s.npcs.size()));
  require(ped_specs.size() == s.pedestrians.size(),
          "participant count mismatch: abstract has " + std::to_string(ped_specs.size()) +
              " pedestrians, scenario has " + std::to_string(s.pedestrians.size()));

  EquivalenceResult res;
  res.feasibility = check_feasibility(s, map);

  const ActionSequence ego_expected = maneuvers_of(a.ego().behaviors);
  const auto route =
      map.shortest_route(s.ego.start.lane, s.ego.start.offset, s.ego.destination.lane, s.ego.destination.offset);
  const ActionSequence ego_actual = route.empty() ? ActionSequence{} : map.route_maneuvers(route);
  if (ego_actual != ego_expected)
    res.diffs.push_back({"ego", ego_expected, ego_actual, {"ego route maneuvers differ"}});

  auto compare = [&](const TrajectoryDef& def, const abstraction::ParticipantSpec& spec) {
    Trajectory traj;
    if (auto it = realised.find(def.name); it != realised.end())
      traj = it->second;
    else
      traj = ScriptedMotion(def, map).sample(0.1);
    const ActionExtraction ex = extract_action_sequence(traj, map, def.type, opts);
    ActionSequence expected;
    for (Action b : spec.behaviors)
      if (expected.empty() || expected.back() != b) expected.push_back(b);
    if (ex.actions != expected || !ex.diagnostics.empty())
      res.diffs.push_back({def.name, expected, ex.actions, ex.diagnostics});
  };
  for (std::size_t i = 0; i < s.npcs.size(); ++i) compare(s.npcs[i], *npc_specs[i]);
  for (std::size_t i = 0; i < s.pedestrians.size(); ++i) compare(s.pedestrians[i], *ped_specs[i]);
  res.equivalent = res.diffs.empty() && res.feasibility.feasible();
  return res;
}

}  // namespace scenforge::inspect
