// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "scenforge/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "scenforge/motion.hpp"

namespace scenforge::synth {

using abstraction::AbstractScenario;
using abstraction::ParticipantSpec;
using abstraction::Role;
using scenlang::ConcreteScenario;
using scenlang::EgoTask;
using scenlang::LanePosition;
using scenlang::TrajectoryDef;
using scenlang::Waypoint;

namespace {

constexpr double kPi = 3.14159265358979323846;

double round2(double v) { return std::round(v * 100.0) / 100.0; }

std::string fmt(double v) {
  std::ostringstream s;
  s << round2(v);
  return s.str();
}

bool is_junction_action(Action a) { return a == Action::turn_left || a == Action::turn_right || a == Action::cross; }

bool is_front(RelativePosition p) {
  return p == RelativePosition::ahead || p == RelativePosition::left_front || p == RelativePosition::right_front;
}

bool is_behind(RelativePosition p) {
  return p == RelativePosition::behind || p == RelativePosition::left_behind || p == RelativePosition::right_behind;
}

bool is_same_road(RelativePosition p) { return is_front(p) || is_behind(p); }

// Lanes of the road containing `id`, rightmost first.
std::vector<const Lane*> road_lanes(const RoadMap& map, const std::string& id) {
  const Lane* l = &map.lane(id);
  while (l->right_neighbor) l = &map.lane(*l->right_neighbor);
  std::vector<const Lane*> out{l};
  while (out.back()->left_neighbor) out.push_back(&map.lane(*out.back()->left_neighbor));
  return out;
}

int index_of(const std::vector<const Lane*>& lanes, const std::string& id) {
  for (std::size_t i = 0; i < lanes.size(); ++i)
    if (lanes[i]->id == id) return static_cast<int>(i);
  return -1;
}

// Middle lanes first, then outward, right before left.
std::vector<int> lane_preference(int n) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  const double mid = (n - 1) / 2.0;
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return std::abs(a - mid) < std::abs(b - mid); });
  return idx;
}

bool feeds_junction(const RoadMap& map, const Lane& l) {
  if (l.junction) return false;
  for (const auto& s : l.successors)
    if (map.lane(s).junction) return true;
  return false;
}

struct Approach {
  std::vector<const Lane*> lanes;  // rightmost first
  double heading = 0.0;            // travel direction at the junction entry
};

std::vector<Approach> approaches(const RoadMap& map, const RoadSelection& road) {
  std::map<std::string, Approach> by_right;
  for (const auto& id : road.lanes) {
    const Lane& l = map.lane(id);
    if (!feeds_junction(map, l)) continue;
    auto lanes = road_lanes(map, id);
    const std::string key = lanes.front()->id;
    if (by_right.count(key)) continue;
    Approach a;
    a.lanes = lanes;
    a.heading = lanes.front()->centerline.heading_at(lanes.front()->length());
    by_right.emplace(key, std::move(a));
  }
  std::vector<Approach> out;
  for (auto& [k, a] : by_right) out.push_back(std::move(a));
  return out;
}

const Lane* junction_exit(const RoadMap& map, const Lane& from, Action turn) {
  for (const auto& s : from.successors) {
    const Lane& c = map.lane(s);
    if (c.junction && map.junction_turn(c) == turn && !c.successors.empty()) return &map.lane(c.successors.front());
  }
  return nullptr;
}

// Signed lane-index shift of the lane changes in `behaviors`; fails when the
// changes leave a road of `n` lanes starting at index `start`.
bool changes_fit(const ActionSequence& behaviors, int start, int n) {
  int k = start;
  for (Action a : behaviors) {
    if (a == Action::change_left) ++k;
    if (a == Action::change_right) --k;
    if (a == Action::turn_left || a == Action::turn_right || a == Action::cross) return true;  // new road
    if (k < 0 || k >= n) return false;
  }
  return true;
}

std::vector<EgoTask> ego_candidates(const RoadMap& map, const RoadSelection& road, const ParticipantSpec& ego,
                                    double start_offset) {
  const ActionSequence wanted = inspect::maneuvers_of(ego.behaviors);
  const auto junction_moves = std::count_if(wanted.begin(), wanted.end(), is_junction_action);
  if (junction_moves > 1) fail(ErrorKind::precondition, "ego behaviors " + to_string(ego.behaviors) + " need more than one junction");
  if (junction_moves == 1 && road.type == RoadType::straight)
    fail(ErrorKind::precondition, "ego behaviors " + to_string(ego.behaviors) + " need a junction, road is straight");
  const bool through = std::find(ego.behaviors.begin(), ego.behaviors.end(), Action::drive_through) != ego.behaviors.end();
  int shift = 0;
  for (Action a : wanted) shift += a == Action::change_left ? 1 : a == Action::change_right ? -1 : 0;
  const bool at_junction = junction_moves == 1;
  const Action junction_move = at_junction ? *std::find_if(wanted.begin(), wanted.end(), is_junction_action) : Action::follow_lane;

  std::vector<std::vector<const Lane*>> roads;
  if (road.type == RoadType::straight) {
    std::set<std::string> seen;
    for (const auto& id : road.lanes) {
      const Lane& l = map.lane(id);
      if (l.junction || !map.predecessors(id).empty()) continue;
      auto lanes = road_lanes(map, id);
      if (seen.insert(lanes.front()->id).second) roads.push_back(std::move(lanes));
    }
  } else {
    for (auto& a : approaches(map, road)) roads.push_back(std::move(a.lanes));
  }

  const ParticipantType type = ego.vehicle_type.value_or(ParticipantType::car);
  std::vector<EgoTask> out;
  for (const auto& lanes : roads) {
    const int n = static_cast<int>(lanes.size());
    for (int k : lane_preference(n)) {
      const Lane& start = *lanes[static_cast<std::size_t>(k)];
      if (start_offset >= start.length() - 20.0) continue;
      std::vector<LanePosition> dests;
      if (at_junction) {
        // Exits reached through connectors of the turn, nearest lane index first.
        std::set<std::string> exits;
        for (const Lane* l : lanes)
          if (const Lane* e = junction_exit(map, *l, junction_move)) exits.insert(e->id);
        for (const auto& e : exits) dests.push_back({e, std::min(40.0, map.lane(e).length() - 5.0)});
      } else if (through) {
        if (start.successors.size() == 1 && !map.lane(start.successors.front()).junction) {
          const int target = k + shift;
          if (target >= 0 && target < n)
            for (const auto& s : lanes[static_cast<std::size_t>(target)]->successors)
              dests.push_back({s, std::min(60.0, map.lane(s).length() - 5.0)});
        }
      } else {
        const int target = k + shift;
        if (target >= 0 && target < n) {
          const Lane& d = *lanes[static_cast<std::size_t>(target)];
          const double off = shift == 0 ? d.length() - 20.0 : std::min(start_offset + 100.0, d.length() - 20.0);
          if (off > start_offset) dests.push_back({d.id, off});
        }
      }
      for (const auto& d : dests) {
        const auto route = map.shortest_route(start.id, start_offset, d.lane, d.offset);
        if (route.empty() || map.route_maneuvers(route) != wanted) continue;
        out.push_back({type, {start.id, start_offset}, d});
      }
    }
  }
  if (out.empty())
    fail(ErrorKind::precondition,
         "no start and destination on " + std::string(to_string(road.type)) + " road realise ego behaviors " + to_string(ego.behaviors));
  return out;
}

// Distance from `p` along `n` to the first point outside every lane.
double edge_distance(const RoadMap& map, Vec2 p, Vec2 n) {
  double d = 0.0;
  while (d < 60.0) {
    bool inside = false;
    for (const auto& h : map.locate_all(p + n * d))
      if (h.inside) inside = true;
    if (!inside) return d;
    d += 0.25;
  }
  return d;
}

double arrival_time(const TrajectoryDef& def, const RoadMap& map) {
  if (def.waypoints.size() < 2) return def.waypoints.empty() ? 0.0 : def.waypoints.front().time.value_or(0.0);
  return ScriptedMotion(def, map).end_time();
}

// Sequential waypoint construction for vehicles.
class VehicleBuilder {
 public:
  VehicleBuilder(const RoadMap& map, TrajectoryDef& def, const Lane* lane, double s, double v)
      : map_(map), def_(def), lane_(lane), s_(s), v_(v) {}

  void start() { push(lane_, s_, v_); }

  void apply(Action a, bool last, double follow_length) {
    const double cap = 0.95 * lane_->speed_limit;
    switch (a) {
      case Action::follow_lane:
        need(v_ >= 0.5, "follow_lane from standstill");
        advance(follow_length, v_);
        break;
      case Action::drive_through: {
        need(v_ >= 1.0, "drive_through from standstill");
        need(lane_->successors.size() == 1 && !map_.lane(lane_->successors.front()).junction,
             "drive_through needs a lane with one non-junction successor");
        const Lane* next = &map_.lane(lane_->successors.front());
        lane_ = next;
        s_ = std::min(40.0, next->length() - 1.0);
        push(lane_, s_, v_);
        break;
      }
      case Action::accelerate: {
        const double v1 = std::min(cap, v_ + 5.0);
        need(v1 - v_ >= 1.5, "accelerate at " + fmt(v_) + " m/s is too close to the limit");
        advance((v1 * v1 - v_ * v_) / (2.0 * 1.5), v1);
        break;
      }
      case Action::decelerate: {
        const double v1 = std::max(2.5, v_ - 5.0);
        need(v_ - v1 >= 1.5, "decelerate at " + fmt(v_) + " m/s is too slow");
        advance((v_ * v_ - v1 * v1) / (2.0 * 1.5), v1);
        break;
      }
      case Action::brake:
        need(v_ >= 4.0, "brake below 4 m/s");
        advance(v_ * v_ / (2.0 * 5.0), 0.0);
        hold(2.0);
        break;
      case Action::stop:
        need(v_ >= 2.0, "stop below 2 m/s");
        advance(v_ * v_ / (2.0 * 1.5), 0.0);
        hold(3.0);
        break;
      case Action::change_left:
      case Action::change_right: {
        const auto& nb = a == Action::change_left ? lane_->left_neighbor : lane_->right_neighbor;
        need(nb.has_value(), std::string(to_string(a)) + " from " + lane_->id + " has no target lane");
        need(v_ >= 3.0, "lane change below 3 m/s");
        const Lane* target = &map_.lane(*nb);
        const double s = target->centerline.project(lane_->centerline.point_at(s_)).s + std::max(30.0, 3.0 * v_);
        need(s <= target->length() - 0.5, std::string(to_string(a)) + " runs past the end of " + target->id);
        lane_ = target;
        s_ = s;
        push(lane_, s_, v_);
        break;
      }
      case Action::turn_left:
      case Action::turn_right:
      case Action::cross: {
        need(v_ >= 2.0, std::string(to_string(a)) + " from standstill");
        need(s_ >= lane_->length() - 2.0, std::string(to_string(a)) + " must start at the junction entry");
        const Lane* exit = junction_exit(map_, *lane_, a);
        need(exit != nullptr, "no " + std::string(to_string(a)) + " connector from " + lane_->id);
        lane_ = exit;
        s_ = last ? 3.0 : 0.5;
        push(lane_, s_, v_);
        break;
      }
      default:
        need(false, "no vehicle template for " + std::string(to_string(a)));
    }
  }

  double offset() const { return s_; }
  double speed() const { return v_; }
  const Lane* lane() const { return lane_; }

 private:
  static void need(bool ok, const std::string& what) {
    if (!ok) fail(ErrorKind::precondition, what);
  }

  void advance(double d, double v1) {
    need(s_ + d <= lane_->length() - 0.5, "no room on " + lane_->id + " for " + fmt(d) + " m");
    s_ += d;
    v_ = v1;
    push(lane_, s_, v_);
  }

  void hold(double seconds) {
    const double t = arrival_time(def_, map_);
    Waypoint w{LanePosition{lane_->id, round2(s_)}, std::nullopt, 0.0, round2(t + seconds)};
    def_.waypoints.push_back(w);
  }

  void push(const Lane* lane, double s, double v) {
    def_.waypoints.push_back({LanePosition{lane->id, round2(s)}, std::nullopt, round2(v), std::nullopt});
  }

  const RoadMap& map_;
  TrajectoryDef& def_;
  const Lane* lane_;
  double s_;
  double v_;
};

// Length a longitudinal or lane-change template covers at speed v; updates v.
double template_length(Action a, double& v, double cap) {
  switch (a) {
    case Action::accelerate: {
      const double v1 = std::min(cap, v + 5.0);
      const double d = (v1 * v1 - v * v) / 3.0;
      v = v1;
      return d;
    }
    case Action::decelerate: {
      const double v1 = std::max(2.5, v - 5.0);
      const double d = (v * v - v1 * v1) / 3.0;
      v = v1;
      return d;
    }
    case Action::brake: {
      const double d = v * v / 10.0;
      v = 0.0;
      return d;
    }
    case Action::stop: {
      const double d = v * v / 3.0;
      v = 0.0;
      return d;
    }
    case Action::change_left:
    case Action::change_right:
      return std::max(30.0, 3.0 * v);
    default:
      return 0.0;
  }
}

TrajectoryDef vehicle_trajectory(const RoadMap& map, const RoadDivision& division, const LanePosition& ego_start,
                                 const ActionSequence& behaviors, ParticipantType type, double base_speed,
                                 const std::string& name, const Placement& pl, const SynthOptions& opts) {
  require(!division.lanes.empty(), "division " + std::string(to_string(division.division_id)) + " has no lanes");
  for (Action a : behaviors)
    if (!is_vehicle_action(a)) fail(ErrorKind::precondition, "no vehicle template for " + std::string(to_string(a)));

  // Lane within the division that keeps every lane change on the road.
  const Lane* lane = nullptr;
  {
    const auto road = road_lanes(map, division.lanes.front());
    std::vector<int> in_division;
    for (const auto& id : division.lanes) in_division.push_back(index_of(road, id));
    for (int k : lane_preference(static_cast<int>(road.size()))) {
      if (std::find(in_division.begin(), in_division.end(), k) == in_division.end()) continue;
      if (changes_fit(behaviors, k, static_cast<int>(road.size()))) {
        lane = road[static_cast<std::size_t>(k)];
        break;
      }
    }
    if (!lane)
      fail(ErrorKind::precondition, "lane changes " + to_string(behaviors) + " leave the road from division " +
                                        std::string(to_string(division.division_id)));
  }

  const bool turns = std::any_of(behaviors.begin(), behaviors.end(),
                                 [](Action a) { return a == Action::turn_left || a == Action::turn_right; });
  const double cap = 0.95 * lane->speed_limit;
  double v = std::clamp(base_speed * pl.speed_scale, 0.5, cap);
  if (turns) v = std::min(v, opts.turn_speed);
  if (!behaviors.empty() && behaviors.front() == Action::accelerate) v = std::max(2.0, v - 5.0);

  double s_start = 0.0;
  const double stack = pl.slot * opts.stack_gap;
  if (is_front(division.division_id))
    s_start = ego_start.offset + division.from + stack + pl.offset_shift;
  else if (is_behind(division.division_id))
    s_start = ego_start.offset + division.to - stack + pl.offset_shift;
  else
    s_start = lane->length() - 40.0 - stack + pl.offset_shift;

  // Follows before the first junction action stretch to reach its entry.
  std::vector<double> follow(behaviors.size(), 0.0);
  const auto first_junction = std::find_if(behaviors.begin(), behaviors.end(), is_junction_action);
  const std::size_t j = static_cast<std::size_t>(first_junction - behaviors.begin());
  {
    double vv = v;
    double upstream = 0.0;  // path length before the junction
    for (std::size_t i = 0; i < behaviors.size(); ++i) {
      const double d = behaviors[i] == Action::follow_lane ? std::max(30.0, 3.0 * vv) : template_length(behaviors[i], vv, cap);
      if (behaviors[i] == Action::follow_lane) follow[i] = d;
      if (i < j) upstream += d;
    }
    // Junction approaches: finish upstream work 10 m short of the entry.
    if (!is_same_road(division.division_id))
      s_start = lane->length() - std::max(40.0, upstream + 10.0) - stack + pl.offset_shift;
  }
  if (first_junction != behaviors.end()) {
    double fixed = 0.0;
    double vv = v;
    std::size_t elastic = 0;
    for (std::size_t i = 0; i < j; ++i) {
      if (behaviors[i] == Action::follow_lane) ++elastic;
      else fixed += template_length(behaviors[i], vv, cap);
    }
    const double entry = lane->length() - 1.0;
    if (elastic == 0) {
      s_start = entry - fixed;
    } else {
      const double each = (entry - s_start - fixed) / static_cast<double>(elastic);
      if (each < std::max(10.0, 1.5 * v))
        fail(ErrorKind::precondition, name + ": no room before the junction for " + to_string(behaviors));
      for (std::size_t i = 0; i < j; ++i)
        if (behaviors[i] == Action::follow_lane) follow[i] = each;
    }
  }
  if (s_start < 0.5 || s_start > lane->length() - 0.5)
    fail(ErrorKind::precondition, name + ": start offset " + fmt(s_start) + " is off " + lane->id);
  if (is_same_road(division.division_id)) {
    const double rel = s_start - ego_start.offset;
    if (rel < division.from - 1e-6 || rel > division.to + 1e-6)
      fail(ErrorKind::precondition, name + ": start " + fmt(rel) + " m from the ego is outside division " +
                                        std::string(to_string(division.division_id)));
  }

  TrajectoryDef def{name, type, std::nullopt, {}};
  VehicleBuilder b(map, def, lane, s_start, v);
  b.start();
  for (std::size_t i = 0; i < behaviors.size(); ++i) b.apply(behaviors[i], i + 1 == behaviors.size(), follow[i]);
  if (def.waypoints.size() < 2) fail(ErrorKind::precondition, name + ": behaviors " + to_string(behaviors) + " yield one waypoint");
  return def;
}

TrajectoryDef pedestrian_trajectory(const RoadMap& map, const RoadDivision& division, const LanePosition& ego_start,
                                    const ActionSequence& behaviors, double base_speed, const std::string& name,
                                    const Placement& pl, const SynthOptions& opts) {
  require(!division.lanes.empty(), "division " + std::string(to_string(division.division_id)) + " has no lanes");
  for (Action a : behaviors)
    if (!is_pedestrian_action(a) && a != Action::cross)
      fail(ErrorKind::precondition, "no pedestrian template for " + std::string(to_string(a)));

  const RelativePosition pos = division.division_id;
  const double stack = pl.slot * opts.stack_gap;
  const Lane* ref = nullptr;
  double s_ref = 0.0;
  if (is_same_road(pos)) {
    ref = &map.lane(ego_start.lane);
    s_ref = is_front(pos) ? ego_start.offset + division.from + stack + pl.offset_shift
                          : ego_start.offset + division.to - stack + pl.offset_shift;
  } else {
    ref = &map.lane(division.lanes.front());
    s_ref = ref->length() - opts.crossing_setback - stack + pl.offset_shift;
  }
  if (s_ref < 1.0 || s_ref > ref->length() - 1.0)
    fail(ErrorKind::precondition, name + ": crossing point " + fmt(s_ref) + " is off " + ref->id);

  const Vec2 p = ref->centerline.point_at(s_ref);
  const Vec2 tangent = ref->centerline.tangent_at(s_ref);
  const Vec2 left{-tangent.y, tangent.x};
  const Vec2 left_curb = p + left * (edge_distance(map, p, left) + opts.curb_margin);
  const Vec2 right_curb = p - left * (edge_distance(map, p, left * -1.0) + opts.curb_margin);

  Vec2 here = right_curb;
  Vec2 there = left_curb;
  if (pos == RelativePosition::left_front || pos == RelativePosition::left_behind) {
    std::swap(here, there);
  } else if (!is_same_road(pos)) {
    const Vec2 ego = map.world_point(ego_start.lane, ego_start.offset);
    if ((left_curb - ego).norm() < (right_curb - ego).norm()) std::swap(here, there);
  }
  const Vec2 along = is_same_road(pos) ? tangent : tangent * -1.0;

  const double v = std::clamp(base_speed * pl.speed_scale, 0.5, 2.5);
  double t = 0.0;
  TrajectoryDef def{name, ParticipantType::pedestrian, std::nullopt, {}};
  auto push = [&](Vec2 q, double speed) {
    def.waypoints.push_back({Vec2{round2(q.x), round2(q.y)}, std::nullopt, round2(speed), round2(t)});
  };
  push(here, behaviors.empty() || behaviors.front() == Action::stand ? 0.0 : v);
  for (Action a : behaviors) {
    switch (a) {
      case Action::stand:
        t += 3.0;
        push(here, 0.0);
        break;
      case Action::walk_along: {
        const Vec2 q = here + along * 20.0;
        t += 20.0 / v;
        here = q;
        there = there + along * 20.0;
        push(here, v);
        break;
      }
      case Action::walk_across: {
        // Step back from the road, square to it.
        const Vec2 away = (here - there) * (1.0 / (here - there).norm());
        here = here + away * 4.0;
        t += 4.0 / v;
        push(here, v);
        break;
      }
      case Action::cross: {
        const double d = (there - here).norm();
        t += d / v;
        std::swap(here, there);
        push(here, v);
        break;
      }
      default:
        break;
    }
  }
  if (def.waypoints.size() < 2) fail(ErrorKind::precondition, name + ": no pedestrian behaviors");
  return def;
}

// Portable uniform in [a, b).
double uniform(std::mt19937_64& rng, double a, double b) {
  const double u = static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
  return a + (b - a) * u;
}

struct Slotted {
  const ParticipantSpec* spec = nullptr;
  std::string name;
  RelativePosition division = RelativePosition::ahead;
  int slot = 0;
};

std::vector<Slotted> slot_participants(const AbstractScenario& a) {
  std::vector<Slotted> out;
  std::map<RelativePosition, int> used;
  int npc = 0;
  int ped = 0;
  for (Role role : {Role::npc, Role::pedestrian}) {
    for (const auto* p : a.with_role(role)) {
      Slotted s;
      s.spec = p;
      s.name = role == Role::npc ? "npc" + std::to_string(++npc) : "ped" + std::to_string(++ped);
      s.division = p->relative_position.value_or(RelativePosition::ahead);
      s.slot = used[s.division]++;
      out.push_back(s);
    }
  }
  return out;
}

const RoadDivision* find_division(const std::vector<RoadDivision>& ds, RelativePosition p) {
  for (const auto& d : ds)
    if (d.division_id == p) return &d;
  return nullptr;
}

struct Attempt {
  std::optional<ConcreteScenario> scenario;
  std::vector<std::string> diagnostics;
  std::set<std::string> offenders;
};

void inspect_into(Attempt& at, const ConcreteScenario& s, const AbstractScenario& a, const RoadMap& map) {
  const auto eq = inspect::check_semantic_equivalence(s, a, map);
  for (const auto& d : eq.feasibility.diagnostics) {
    at.diagnostics.push_back(std::string(to_string(d.constraint)) + ": " + d.participant + ": " + d.detail);
    at.offenders.insert(d.participant);
  }
  for (const auto& d : eq.diffs) {
    std::string line = "semantic: " + d.participant + ": expected " + to_string(d.expected) + ", got " + to_string(d.actual);
    for (const auto& x : d.diagnostics) line += "; " + x;
    at.diagnostics.push_back(line);
    at.offenders.insert(d.participant);
  }
}

}  // namespace

std::string RoadSelection::describe(const RoadMap& map) const {
  std::ostringstream out;
  for (const auto& id : lanes) {
    const Lane& l = map.lane(id);
    double deg = l.centerline.heading_at(0.0) * 180.0 / kPi;
    if (deg < 0.0) deg += 360.0;
    out << id << " direction " << fmt(deg) << " deg length " << fmt(l.length()) << " m";
    if (l.junction) out << " (junction connector)";
    out << '\n';
  }
  return out.str();
}

RoadSelection select_road(const RoadMap& map, RoadType type, std::optional<std::uint64_t> seed) {
  const auto segs = map.segments(type);
  if (segs.empty()) fail(ErrorKind::precondition, "map " + map.id() + " has no " + std::string(to_string(type)) + " segment");
  RoadSelection r;
  r.segment = seed ? segs[*seed % segs.size()] : segs.front();
  r.type = type;
  for (const Lane* l : map.segment_lanes(r.segment)) r.lanes.push_back(l->id);
  std::sort(r.lanes.begin(), r.lanes.end());
  return r;
}

EgoTask assign_ego_task(const RoadMap& map, const RoadSelection& road, const ParticipantSpec& ego, const SynthOptions& opts) {
  return ego_candidates(map, road, ego, opts.ego_start_offset).front();
}

std::vector<RoadDivision> divide_road(const RoadMap& map, const RoadSelection& road, const LanePosition& ego_start,
                                      const SynthOptions& opts) {
  const Lane& start = map.lane(ego_start.lane);
  const auto lanes = road_lanes(map, start.id);
  const int k = index_of(lanes, start.id);
  const double s0 = ego_start.offset;
  const double len = start.length();
  std::map<RelativePosition, RoadDivision> found;
  auto same_road = [&](RelativePosition front, RelativePosition behind, const Lane* l) {
    found[front] = {front, {l->id}, opts.front_gap, len - s0};
    found[behind] = {behind, {l->id}, -s0, -opts.behind_gap};
  };
  same_road(RelativePosition::ahead, RelativePosition::behind, &start);
  if (k + 1 < static_cast<int>(lanes.size()))
    same_road(RelativePosition::left_front, RelativePosition::left_behind, lanes[static_cast<std::size_t>(k + 1)]);
  if (k > 0) same_road(RelativePosition::right_front, RelativePosition::right_behind, lanes[static_cast<std::size_t>(k - 1)]);

  if (road.type != RoadType::straight && feeds_junction(map, start)) {
    const double h = start.centerline.heading_at(len);
    for (const auto& a : approaches(map, road)) {
      if (index_of(a.lanes, start.id) >= 0) continue;
      const double d = wrap_angle(a.heading - h) * 180.0 / kPi;
      std::optional<RelativePosition> p;
      if (std::abs(d - 90.0) < 45.0) p = RelativePosition::right_vertical;
      else if (std::abs(d + 90.0) < 45.0) p = RelativePosition::left_vertical;
      else if (std::abs(d) > 135.0) p = RelativePosition::opposite;
      if (!p || found.count(*p)) continue;
      RoadDivision div{*p, {}, 0.0, a.lanes.front()->length()};
      for (const Lane* l : a.lanes) div.lanes.push_back(l->id);
      found[*p] = div;
    }
  }
  std::vector<RoadDivision> out;
  for (RelativePosition p : kAllRelativePositions)
    if (auto it = found.find(p); it != found.end()) out.push_back(it->second);
  return out;
}

TrajectoryDef gen_participant_trajectory(const RoadMap& map, const RoadDivision& division, const LanePosition& ego_start,
                                         const ActionSequence& behaviors, ParticipantType type, double base_speed,
                                         const std::string& name, const Placement& placement, const SynthOptions& opts) {
  require(!behaviors.empty(), name + " has no behaviors");
  if (type == ParticipantType::pedestrian)
    return pedestrian_trajectory(map, division, ego_start, behaviors, base_speed, name, placement, opts);
  return vehicle_trajectory(map, division, ego_start, behaviors, type, base_speed, name, placement, opts);
}

ConcreteScenario attach_assertions(ConcreteScenario s, const scenlang::AssertionDefaults& d) {
  if (s.assertions.empty()) s.assertions = scenlang::default_assertions(d);
  return s;
}

Generation generate_concrete(const AbstractScenario& a, const RoadMap& map, std::uint64_t seed, const SynthOptions& opts) {
  abstraction::validate(a);
  const RoadSelection road = select_road(map, a.road_type);
  const auto slots = slot_participants(a);
  const bool rear = std::any_of(slots.begin(), slots.end(), [](const Slotted& s) { return is_behind(s.division); });
  const double start_offset = rear ? opts.ego_start_with_rear : opts.ego_start_offset;

  std::map<std::string, Placement> placement;
  for (const auto& s : slots) placement[s.name].slot = s.slot;

  Generation gen;
  std::vector<std::string> last;
  for (int round = 0; round <= opts.repair_rounds; ++round) {
    Attempt at;
    try {
      const auto candidates = ego_candidates(map, road, a.ego(), start_offset);
      // First ego task whose divisions host every participant's template.
      std::optional<ConcreteScenario> built;
      std::optional<Attempt> first_failure;
      for (const auto& c : candidates) {
        const auto divisions = divide_road(map, road, c.start, opts);
        Attempt trial;
        ConcreteScenario s;
        s.map_id = map.id();
        s.ego = c;
        for (const auto& sl : slots) {
          const ParticipantSpec& p = *sl.spec;
          const RoadDivision* div = find_division(divisions, sl.division);
          if (!div) {
            trial.diagnostics.push_back("template: " + sl.name + ": no " + std::string(to_string(sl.division)) +
                                        " division from " + c.start.lane);
            continue;
          }
          const bool ped = p.role == Role::pedestrian;
          const ParticipantType type = ped ? ParticipantType::pedestrian : p.vehicle_type.value_or(ParticipantType::car);
          const double limit = map.lane(div->lanes.front()).speed_limit;
          const double base = p.speed.value_or(ped ? opts.pedestrian_speed : opts.speed_factor * limit);
          try {
            auto def = gen_participant_trajectory(map, *div, s.ego.start, p.behaviors, type, base, sl.name,
                                                  placement[sl.name], opts);
            (ped ? s.pedestrians : s.npcs).push_back(std::move(def));
          } catch (const Error& e) {
            trial.diagnostics.push_back(std::string("template: ") + sl.name + ": " + e.what());
            trial.offenders.insert(sl.name);
          }
        }
        if (trial.diagnostics.empty()) {
          built = std::move(s);
          break;
        }
        if (!first_failure) first_failure = std::move(trial);
      }
      if (!built) {
        at = std::move(*first_failure);
      } else {
        ConcreteScenario s = attach_assertions(std::move(*built), opts.assertions);
        inspect_into(at, s, a, map);
        if (at.diagnostics.empty()) at.scenario = std::move(s);
      }
    } catch (const Error& e) {
      at.diagnostics.push_back(std::string("template: ") + e.what());
    }

    if (at.scenario) {
      gen.scenario = std::move(*at.scenario);
      gen.repairs = round;
      return gen;
    }
    for (const auto& d : at.diagnostics) gen.log.push_back("round " + std::to_string(round) + ": " + d);
    last = at.diagnostics;

    // Jitter the offenders, or everyone when the fault is not attributable.
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(round + 1));
    const bool everyone = at.offenders.empty() || at.offenders.count("ego") || at.offenders.count("scenario");
    for (const auto& sl : slots) {
      const double shift = uniform(rng, -opts.jitter_offset, opts.jitter_offset);
      const double scale = 1.0 + uniform(rng, -opts.jitter_speed, opts.jitter_speed);
      if (!everyone && !at.offenders.count(sl.name)) continue;
      placement[sl.name].offset_shift = shift;
      placement[sl.name].speed_scale = scale;
    }
  }
  throw GenerationFailed("generation failed for '" + a.id + "' after " + std::to_string(opts.repair_rounds) +
                             " repair rounds",
                         last);
}

// ---------------------------------------------------------------------------
// Remote path

std::string CotPrompts::joined() const {
  std::string out;
  for (const auto& s : stages) {
    if (!out.empty()) out += "\n\n";
    out += s;
  }
  return out;
}

namespace {

std::string describe_abstract(const AbstractScenario& a) {
  std::ostringstream out;
  out << "Road type: " << to_string(a.road_type) << "\n";
  int npc = 0;
  int ped = 0;
  for (const auto& p : a.participants) {
    std::string name = p.role == Role::ego ? "ego" : p.role == Role::npc ? "npc" + std::to_string(++npc) : "ped" + std::to_string(++ped);
    out << name << ": ";
    if (p.vehicle_type) out << to_string(*p.vehicle_type) << ", ";
    if (p.relative_position) out << "position " << to_string(*p.relative_position) << ", ";
    out << "behaviors " << to_string(p.behaviors) << "\n";
  }
  return out.str();
}

std::string waypoint_text(const Waypoint& w) {
  std::ostringstream out;
  out << "(";
  if (const auto* lp = std::get_if<LanePosition>(&w.position)) out << "\"" << lp->lane << "\"->" << fmt(lp->offset);
  else {
    const auto& p = std::get<Vec2>(w.position);
    out << "(" << fmt(p.x) << ", " << fmt(p.y) << ")";
  }
  out << ", , " << fmt(w.speed);
  if (w.time) out << ", t=" << fmt(*w.time);
  out << ")";
  return out.str();
}

std::string strip_fences(const std::string& text) {
  const auto open = text.find("```");
  if (open == std::string::npos) return text;
  const auto body = text.find('\n', open);
  const auto close = text.find("```", body == std::string::npos ? open + 3 : body);
  if (body == std::string::npos || close == std::string::npos) return text;
  return text.substr(body + 1, close - body - 1);
}

}  // namespace

CotPrompts build_cot_prompts(const AbstractScenario& a, const RoadMap& map, const SynthOptions& opts) {
  abstraction::validate(a);
  const RoadSelection road = select_road(map, a.road_type);
  CotPrompts p;

  p.stages.push_back(
      "You write concrete test scenarios for an automated driving system. Produce 1 scenario program that "
      "realises the abstract scenario below exactly; the ego vehicle is driven by the system under test.\n" +
      describe_abstract(a));

  // A small program on the selected road shows the syntax.
  ParticipantSpec follow{Role::ego, ParticipantType::car, {Action::follow_lane}, std::nullopt, std::nullopt};
  const EgoTask example_ego = assign_ego_task(map, road, follow, opts);
  ConcreteScenario example;
  example.map_id = map.id();
  example.ego = example_ego;
  const auto divisions = divide_road(map, road, example_ego.start, opts);
  const RoadDivision* side = find_division(divisions, RelativePosition::right_front);
  if (!side) side = find_division(divisions, RelativePosition::left_front);
  if (!side) side = find_division(divisions, RelativePosition::ahead);
  const double limit = map.lane(side->lanes.front()).speed_limit;
  const auto example_npc = gen_participant_trajectory(map, *side, example_ego.start, {Action::follow_lane},
                                                      ParticipantType::car, opts.speed_factor * limit, "npc1", {}, opts);
  example.npcs.push_back(example_npc);
  example = attach_assertions(std::move(example), opts.assertions);
  p.stages.push_back("Scenario program format, by example:\n" + scenlang::print_scenario(example) +
                     "The ego block gives the start and destination as (\"lane\"->offset in meters). Each participant "
                     "lists waypoints (position, lateral offset, speed in m/s, optional t=arrival time in s); "
                     "positions are lane offsets or (x, y) points.");

  p.stages.push_back("Road segment " + road.segment + " (" + std::string(to_string(road.type)) +
                     "), lanes with direction and length:\n" + road.describe(map));

  p.stages.push_back("Ego task. For follow_lane on this road the start S is (\"" + example_ego.start.lane + "\"->" +
                     fmt(example_ego.start.offset) + ") and the destination D is (\"" + example_ego.destination.lane +
                     "\"->" + fmt(example_ego.destination.offset) + "). Choose S and D so that the shortest lane route " +
                     "performs the ego behaviors " + to_string(a.ego().behaviors) + ".");

  std::ostringstream div;
  div << "The road around the ego start is split into " << divisions.size() << " divisions:\n";
  for (const auto& d : divisions) {
    div << to_string(d.division_id) << ": lanes";
    for (const auto& l : d.lanes) div << " " << l;
    div << ", " << fmt(d.from) << " to " << fmt(d.to) << " m\n";
  }
  div << "Each participant starts inside the division named by its position.";
  p.stages.push_back(div.str());

  std::ostringstream traj;
  traj << "A car in " << to_string(side->division_id) << " doing follow_lane has the waypoints (";
  for (std::size_t i = 0; i < example_npc.waypoints.size(); ++i)
    traj << (i ? ", " : "") << waypoint_text(example_npc.waypoints[i]);
  traj << "). Give every participant waypoints that perform its behaviors in order, within the lane speed limits.";
  p.stages.push_back(traj.str());

  ConcreteScenario asserts;
  asserts.assertions = scenlang::default_assertions(opts.assertions);
  const std::string printed = scenlang::print_scenario(asserts);
  const auto at = printed.find("assert");
  p.stages.push_back("Finish the program with the assertions:\n" + (at == std::string::npos ? printed : printed.substr(at)) +
                     "Reply with the scenario program only.");
  return p;
}

Generation generate_concrete_remote(const AbstractScenario& a, const RoadMap& map, abstraction::Provider& provider,
                                    const SynthOptions& opts) {
  const std::string base = build_cot_prompts(a, map, opts).joined();
  std::string prompt = base;
  Generation gen;
  std::vector<std::string> last;
  for (int round = 0; round <= opts.repair_rounds; ++round) {
    Attempt at;
    const auto reply = provider.describe(prompt, {});
    const auto parsed = scenlang::parse_scenario(strip_fences(reply.raw_text));
    if (!parsed.scenario) {
      for (const auto& d : parsed.diagnostics) at.diagnostics.push_back("parse: " + d.str());
    } else {
      ConcreteScenario s = attach_assertions(*parsed.scenario, opts.assertions);
      if (s.map_id.empty()) s.map_id = map.id();
      for (const auto& d : scenlang::validate_refs(s, map)) at.diagnostics.push_back("reference: " + d.str());
      if (at.diagnostics.empty()) {
        try {
          inspect_into(at, s, a, map);
        } catch (const Error& e) {
          at.diagnostics.push_back(std::string("semantic: ") + e.what());
        }
      }
      if (at.diagnostics.empty()) {
        gen.scenario = std::move(s);
        gen.repairs = round;
        return gen;
      }
    }
    for (const auto& d : at.diagnostics) gen.log.push_back("round " + std::to_string(round) + ": " + d);
    last = at.diagnostics;
    prompt = base + "\n\nYour previous program was rejected:\n";
    for (const auto& d : at.diagnostics) prompt += "- " + d + "\n";
    prompt += "Return a corrected program.";
  }
  throw GenerationFailed("remote generation failed for '" + a.id + "' after " + std::to_string(opts.repair_rounds) +
                             " repair rounds",
                         last);
}

}  // namespace scenforge::synth
