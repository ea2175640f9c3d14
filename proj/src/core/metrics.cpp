// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "scenforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace scenforge::metrics {

namespace {

bool in_family(Action a, std::initializer_list<Action> family) {
  return std::find(family.begin(), family.end(), a) != family.end();
}

bool same_family(Action a, Action b) {
  using enum Action;
  for (auto fam : {std::initializer_list<Action>{accelerate, decelerate, brake, stop},
                   std::initializer_list<Action>{walk_along, walk_across, stand}})
    if (in_family(a, fam) && in_family(b, fam)) return true;
  return false;
}

bool opposite(Action a, Action b) {
  using enum Action;
  auto pair = [&](Action x, Action y) { return (a == x && b == y) || (a == y && b == x); };
  return pair(change_left, change_right) || pair(turn_left, turn_right);
}

}  // namespace

CostModel::CostModel() {
  for (Action a : kAllActions) {
    for (Action b : kAllActions) {
      double c = 1.0;
      if (a == b)
        c = 0.0;
      else if (same_family(a, b))
        c = 0.5;
      else if (opposite(a, b))
        c = 2.0;
      table_[idx(a)][idx(b)] = c;
    }
  }
}

void CostModel::set_lambda(double v) {
  require(std::isfinite(v) && v >= 0.0, "lambda_indel must be a finite non-negative cost");
  lambda_ = v;
}

void CostModel::set_replace(Action a, Action b, double cost) {
  require(std::isfinite(cost) && cost >= 0.0, "replacement costs must be finite and non-negative");
  require(a != b || cost == 0.0, "replacing an action with itself must cost 0");
  table_[idx(a)][idx(b)] = cost;
  table_[idx(b)][idx(a)] = cost;
}

CostModel CostModel::from_json(const nlohmann::json& j) {
  CostModel m;
  if (!j.is_object()) fail(ErrorKind::parse, "cost model must be a JSON object");
  try {
    if (j.contains("lambda_indel")) m.set_lambda(j.at("lambda_indel").get<double>());
    if (j.contains("replacement")) {
      std::map<std::pair<Action, Action>, double> seen;
      for (const auto& [key, val] : j.at("replacement").items()) {
        const auto comma = key.find(',');
        if (comma == std::string::npos) fail(ErrorKind::parse, "replacement key '" + key + "' is not 'a,b'");
        const auto a = action_from_string(key.substr(0, comma));
        const auto b = action_from_string(key.substr(comma + 1));
        if (!a || !b) fail(ErrorKind::parse, "unknown action in replacement key '" + key + "'");
        const double cost = val.get<double>();
        const auto mirror = seen.find({*b, *a});
        if (mirror != seen.end() && mirror->second != cost)
          fail(ErrorKind::precondition, "replacement table is not symmetric at '" + key + "'");
        seen[{*a, *b}] = cost;
        m.set_replace(*a, *b, cost);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, std::string("cost model: ") + e.what());
  }
  return m;
}

CostModel CostModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open cost model '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, "cost model '" + path + "': " + e.what());
  }
  return from_json(j);
}

nlohmann::json CostModel::to_json() const {
  nlohmann::json rep = nlohmann::json::object();
  for (std::size_t i = 0; i < kActionCount; ++i)
    for (std::size_t k = i + 1; k < kActionCount; ++k)
      rep[std::string(to_string(kAllActions[i])) + "," + std::string(to_string(kAllActions[k]))] = table_[i][k];
  return {{"lambda_indel", lambda_}, {"replacement", rep}};
}

double behavior_distance(const ActionSequence& from, const ActionSequence& to, const CostModel& costs) {
  const std::size_t m = from.size(), n = to.size();
  std::vector<double> prev(n + 1), cur(n + 1);
  prev[0] = 0.0;
  for (std::size_t j = 1; j <= n; ++j) prev[j] = prev[j - 1] + costs.insert(to[j - 1]);
  for (std::size_t i = 1; i <= m; ++i) {
    cur[0] = prev[0] + costs.remove(from[i - 1]);
    for (std::size_t j = 1; j <= n; ++j) {
      cur[j] = std::min({prev[j] + costs.remove(from[i - 1]), cur[j - 1] + costs.insert(to[j - 1]),
                         prev[j - 1] + costs.replace(from[i - 1], to[j - 1])});
    }
    std::swap(prev, cur);
  }
  return prev[n];
}

double trajectory_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b, std::size_t mu) {
  require(!a.empty() && !b.empty(), "trajectory_distance needs non-empty trajectories");
  require(mu >= 2, "resample count mu must be >= 2");
  const auto ra = Polyline(a).resample(mu);
  const auto rb = Polyline(b).resample(mu);
  double sum = 0.0;
  for (std::size_t k = 0; k < mu; ++k) sum += (ra[k] - rb[k]).norm();
  return sum;
}

std::vector<Vec2> path_of(const Trajectory& t) {
  std::vector<Vec2> out;
  out.reserve(t.size());
  for (const auto& p : t) out.push_back(p.pos);
  return out;
}

double scenario_distance(const ScenarioPaths& s1, const ScenarioPaths& s2, std::size_t mu) {
  require(!s1.empty() && !s2.empty(), "scenario_distance needs at least one participant per scenario");
  double sum = 0.0;
  for (const auto& a : s1)
    for (const auto& b : s2) sum += trajectory_distance(a, b, mu);
  return sum / static_cast<double>(s1.size() * s2.size());
}

double variation_range(const ScenarioPaths& sf, const std::vector<ScenarioPaths>& z, std::size_t mu) {
  double best = 0.0;
  for (const auto& s : z) best = std::max(best, scenario_distance(sf, s, mu));
  return best;
}

std::string_view to_string(SuaCategory c) {
  switch (c) {
    case SuaCategory::road: return "road";
    case SuaCategory::ego_task: return "ego_task";
    case SuaCategory::participant: return "participant";
    case SuaCategory::relative_position: return "relative_position";
  }
  return "?";
}

ScenarioElements elements_of(const abstraction::AbstractScenario& a, SuaCategory c) {
  using abstraction::Role;
  ScenarioElements out;
  auto type_name = [](const abstraction::ParticipantSpec& p) {
    return p.vehicle_type ? std::string(to_string(*p.vehicle_type)) : std::string("none");
  };
  switch (c) {
    case SuaCategory::road:
      out.push_back({std::string(to_string(a.road_type)), std::string(abstraction::to_string(a.traffic_signal))});
      break;
    case SuaCategory::ego_task:
      for (const auto& p : a.participants)
        if (p.role == Role::ego) out.push_back({type_name(p), to_string(p.behaviors)});
      break;
    case SuaCategory::participant:
      for (const auto& p : a.participants)
        if (p.role != Role::ego)
          out.push_back({std::string(abstraction::to_string(p.role)), type_name(p), to_string(p.behaviors)});
      break;
    case SuaCategory::relative_position:
      for (const auto& p : a.participants)
        if (p.role != Role::ego)
          out.push_back({std::string(abstraction::to_string(p.role)),
                         p.relative_position ? std::string(to_string(*p.relative_position)) : std::string("none")});
      break;
  }
  return out;
}

double sua(const std::vector<ScenarioElements>& extracted, const std::vector<ScenarioElements>& truth) {
  require(!truth.empty(), "sua needs at least one scenario");
  require(extracted.size() == truth.size(), "sua: " + std::to_string(extracted.size()) + " extractions for " +
                                                std::to_string(truth.size()) + " ground-truth scenarios");
  std::size_t total = 0, correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    for (std::size_t k = 0; k < truth[i].size(); ++k) {
      ++total;
      if (k < extracted[i].size() && extracted[i][k] == truth[i][k]) ++correct;
    }
  }
  require(total > 0, "sua: ground truth has no elements");
  return static_cast<double>(correct) / static_cast<double>(total);
}

double csc(const std::vector<std::vector<bool>>& element_results) {
  require(!element_results.empty(), "csc needs at least one scenario");
  std::size_t ok = 0;
  for (const auto& r : element_results)
    if (std::all_of(r.begin(), r.end(), [](bool b) { return b; })) ++ok;
  return static_cast<double>(ok) / static_cast<double>(element_results.size());
}

std::vector<bool> element_results(const inspect::EquivalenceResult& r, const scenlang::ConcreteScenario& s) {
  std::set<std::string> bad;
  for (const auto& d : r.diffs) bad.insert(d.participant);
  bool all_bad = false;
  for (const auto& d : r.feasibility.diagnostics) {
    if (d.participant == "scenario") all_bad = true;
    bad.insert(d.participant);
  }
  std::vector<bool> out;
  out.push_back(!all_bad && !bad.count("ego"));
  for (const auto* t : s.participants()) out.push_back(!all_bad && !bad.count(t->name));
  return out;
}

}  // namespace scenforge::metrics
