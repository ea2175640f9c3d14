// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "scenforge/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace scenforge::sim {

using scenlang::AssertionKind;

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::horizon: return "horizon";
    case Termination::all_assertions_resolved: return "all_assertions_resolved";
    case Termination::collision: return "collision";
    case Termination::policy_fault: return "policy_fault";
  }
  return "?";
}

Vec2 destination_of(const scenlang::ConcreteScenario& s, const RoadMap& map) {
  return map.world_point(s.ego.destination.lane, s.ego.destination.offset);
}

namespace {

const scenlang::Assertion* find_assertion(const std::vector<scenlang::Assertion>& as, AssertionKind k) {
  for (const auto& a : as)
    if (a.kind == k) return &a;
  return nullptr;
}

EntityState scripted_state(const scenlang::TrajectoryDef& def, const ScriptedMotion& m, double t) {
  const auto f = footprint_of(def);
  const auto st = m.at(t);
  EntityState e;
  e.id = def.name;
  e.type = def.type;
  e.pos = st.pos;
  e.heading = st.heading;
  e.speed = st.speed;
  e.half_length = f.length / 2.0;
  e.half_width = f.width / 2.0;
  e.active = m.active(t);
  return e;
}

bool ego_collides(const WorldState& w, double tol) {
  for (const auto& [i, j] : detect_collision(w, tol))
    if (i == 0) return true;
  return false;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << v;
  return s.str();
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> detect_collision(const WorldState& state, double tolerance) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const auto& es = state.entities;
  for (std::size_t i = 0; i < es.size(); ++i) {
    if (!es[i].active) continue;
    for (std::size_t j = i + 1; j < es.size(); ++j) {
      if (!es[j].active) continue;
      if (boxes_overlap(es[i].box(), es[j].box(), tolerance)) out.emplace_back(i, j);
    }
  }
  return out;
}

ExecutionTrace run_scenario(const scenlang::ConcreteScenario& s, const RoadMap& map, EgoPolicy& policy,
                            const SimOptions& opts) {
  require(opts.dt > 0.0 && opts.dt <= 0.5, "dt must lie in (0, 0.5]");
  require(opts.horizon > 0.0, "horizon must be positive");

  const auto participants = s.participants();
  std::vector<ScriptedMotion> motions;
  motions.reserve(participants.size());
  for (const auto* p : participants) motions.emplace_back(*p, map);

  PolicyContext ctx;
  ctx.map = &map;
  ctx.task = s.ego;
  ctx.route = map.shortest_route(s.ego.start.lane, s.ego.start.offset, s.ego.destination.lane, s.ego.destination.offset);
  if (const auto* c = find_assertion(s.assertions, AssertionKind::always_clearance)) ctx.clearance = c->clearance;
  ctx.seed = opts.seed;

  const auto* eventually = find_assertion(s.assertions, AssertionKind::eventually_at_destination);
  const Vec2 dest = destination_of(s, map);

  ExecutionTrace trace;
  trace.dt = opts.dt;

  WorldState w;
  {
    EntityState ego;
    ego.id = "ego";
    ego.type = s.ego.type;
    ego.pos = map.world_point(s.ego.start.lane, s.ego.start.offset);
    ego.heading = map.lane(s.ego.start.lane).centerline.heading_at(s.ego.start.offset);
    const auto f = default_footprint(s.ego.type);
    ego.half_length = f.length / 2.0;
    ego.half_width = f.width / 2.0;
    w.entities.push_back(ego);
    for (std::size_t i = 0; i < participants.size(); ++i)
      w.entities.push_back(scripted_state(*participants[i], motions[i], 0.0));
  }

  auto record = [&](const WorldState& st) {
    trace.steps.push_back(st);
    for (const auto& e : st.entities)
      if (e.active) trace.trajectories[e.id].push_back({e.pos, e.velocity(), st.time});
  };
  auto resolved = [&](const WorldState& st) {
    if (!eventually) return false;
    return (st.entities[0].pos - dest).norm() <= eventually->radius || st.time >= eventually->within - 1e-9;
  };

  policy.reset(ctx);
  record(w);
  const auto steps = static_cast<long>(std::floor(opts.horizon / opts.dt + 1e-9));
  trace.termination = Termination::horizon;
  if (ego_collides(w, opts.collision_tolerance)) {
    trace.termination = Termination::collision;
    return trace;
  }
  if (resolved(w)) {
    trace.termination = Termination::all_assertions_resolved;
    return trace;
  }

  for (long k = 0; k < steps; ++k) {
    Observation obs;
    obs.time = w.time;
    obs.dt = opts.dt;
    obs.ego = w.entities[0];
    for (std::size_t i = 1; i < w.entities.size(); ++i) {
      const auto& e = w.entities[i];
      if (e.active && (e.pos - obs.ego.pos).norm() <= opts.sensing_radius) obs.visible.push_back(e);
    }
    Command cmd;
    try {
      cmd = policy.step(obs);
      if (!std::isfinite(cmd.target_speed) || !std::isfinite(cmd.curvature))
        fail(ErrorKind::domain, "policy returned a non-finite command");
    } catch (const std::exception& e) {
      trace.termination = Termination::policy_fault;
      trace.fault = e.what();
      return trace;
    }

    WorldState next;
    next.time = static_cast<double>(k + 1) * opts.dt;
    EntityState ego = w.entities[0];
    const double dv = opts.max_accel * opts.dt;
    const double v = std::clamp(std::max(0.0, cmd.target_speed), ego.speed - dv, ego.speed + dv);
    const double kappa = std::clamp(cmd.curvature, -opts.max_curvature, opts.max_curvature);
    const double ds = std::max(0.0, v) * opts.dt;
    ego.pos = ego.pos + unit_from_heading(ego.heading + 0.5 * kappa * ds) * ds;
    ego.heading = wrap_angle(ego.heading + kappa * ds);
    ego.speed = std::max(0.0, v);
    next.entities.push_back(ego);
    for (std::size_t i = 0; i < participants.size(); ++i)
      next.entities.push_back(scripted_state(*participants[i], motions[i], next.time));
    w = std::move(next);
    record(w);

    if (ego_collides(w, opts.collision_tolerance)) {
      trace.termination = Termination::collision;
      return trace;
    }
    if (k + 1 == steps) break;
    if (resolved(w)) {
      trace.termination = Termination::all_assertions_resolved;
      return trace;
    }
  }
  return trace;
}

std::vector<double> ego_clearances(const ExecutionTrace& trace) {
  std::vector<double> out;
  out.reserve(trace.steps.size());
  for (const auto& st : trace.steps) {
    double best = std::numeric_limits<double>::infinity();
    const auto ego = st.entities.front().box();
    for (std::size_t i = 1; i < st.entities.size(); ++i)
      if (st.entities[i].active) best = std::min(best, box_distance(ego, st.entities[i].box()));
    out.push_back(best);
  }
  return out;
}

std::vector<Verdict> monitor_assertions(const ExecutionTrace& trace, const std::vector<scenlang::Assertion>& assertions,
                                        const Vec2& destination, double tolerance) {
  require(!trace.steps.empty(), "trace is empty");
  std::vector<Verdict> out;
  for (const auto& a : assertions) {
    Verdict v;
    v.assertion = a;
    switch (a.kind) {
      case AssertionKind::never_collision:
        for (std::size_t k = 0; k < trace.steps.size() && !v.step; ++k) {
          for (const auto& [i, j] : detect_collision(trace.steps[k], tolerance)) {
            if (i != 0) continue;
            v.status = VerdictStatus::violated;
            v.step = k;
            v.detail = "collision with " + trace.steps[k].entities[j].id + " at t=" + fmt(trace.steps[k].time) + " s";
            break;
          }
        }
        break;
      case AssertionKind::always_clearance:
        for (std::size_t k = 0; k < trace.steps.size() && !v.step; ++k) {
          const auto& st = trace.steps[k];
          const auto ego = st.entities.front().box();
          for (std::size_t i = 1; i < st.entities.size(); ++i) {
            if (!st.entities[i].active) continue;
            const double d = box_distance(ego, st.entities[i].box());
            if (d < a.clearance) {
              v.status = VerdictStatus::violated;
              v.step = k;
              v.detail = "clearance " + fmt(d) + " m to " + st.entities[i].id + " at t=" + fmt(st.time) + " s";
              break;
            }
          }
        }
        break;
      case AssertionKind::eventually_at_destination: {
        v.status = VerdictStatus::violated;
        for (std::size_t k = 0; k < trace.steps.size(); ++k) {
          const auto& st = trace.steps[k];
          if (st.time > a.within + 1e-9) break;
          if ((st.entities.front().pos - destination).norm() <= a.radius) {
            v.status = VerdictStatus::satisfied;
            v.step = k;
            v.detail = "reached destination at t=" + fmt(st.time) + " s";
            break;
          }
        }
        if (v.status == VerdictStatus::violated) {
          std::size_t k = trace.steps.size() - 1;
          for (std::size_t i = 0; i < trace.steps.size(); ++i)
            if (trace.steps[i].time >= a.within - 1e-9) {
              k = i;
              break;
            }
          v.step = k;
          v.detail = "destination not reached by t=" + fmt(trace.steps[k].time) + " s";
        }
        break;
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

double longest_stall(const ExecutionTrace& trace, const Vec2& destination, double radius) {
  double best = 0.0;
  std::optional<double> since;
  for (const auto& st : trace.steps) {
    const auto& ego = st.entities.front();
    const bool stalled = ego.speed < 0.1 && (ego.pos - destination).norm() > radius;
    if (stalled) {
      if (!since) since = st.time;
      best = std::max(best, st.time - *since);
    } else {
      since.reset();
    }
  }
  return best;
}

std::string trace_to_jsonl(const ExecutionTrace& trace) {
  std::string out;
  for (const auto& st : trace.steps) {
    nlohmann::json ents = nlohmann::json::array();
    for (const auto& e : st.entities)
      ents.push_back({{"id", e.id},
                      {"type", to_string(e.type)},
                      {"x", e.pos.x},
                      {"y", e.pos.y},
                      {"heading", e.heading},
                      {"speed", e.speed},
                      {"active", e.active}});
    out += nlohmann::json{{"t", st.time}, {"entities", ents}}.dump();
    out += '\n';
  }
  return out;
}

nlohmann::json Replay::to_json() const {
  return {{"scenario", scenario}, {"policy", policy}, {"seed", seed}, {"dt", dt}, {"horizon", horizon}};
}

Replay Replay::from_json(const nlohmann::json& j) {
  Replay r;
  try {
    r.scenario = j.at("scenario").get<std::string>();
    r.policy = j.at("policy").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.dt = j.value("dt", 0.1);
    r.horizon = j.value("horizon", 60.0);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, std::string("replay: ") + e.what());
  }
  return r;
}

}  // namespace scenforge::sim
