// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>
#include <vector>

#include "json.hpp"

#include "scenforge/common.hpp"
#include "scenforge/geometry.hpp"
#include "scenforge/inspect.hpp"

namespace scenforge::metrics {

/// Edit costs for behavior_distance. Insertions and deletions cost lambda.
class CostModel {
 public:
  /// The default table: 0.5 within {accelerate, decelerate, brake, stop} and
  /// within {walk_along, walk_across, stand}; 2.0 for change_left/change_right
  /// and turn_left/turn_right; 1.0 for any other distinct pair.
  CostModel();

  double lambda() const { return lambda_; }
  double replace(Action a, Action b) const { return table_[idx(a)][idx(b)]; }
  double insert(Action) const { return lambda_; }
  double remove(Action) const { return lambda_; }

  void set_lambda(double v);
  /// Sets both (a, b) and (b, a).
  void set_replace(Action a, Action b, double cost);

  /// {"lambda_indel": 1.0, "replacement": {"brake,decelerate": 0.5, ...}};
  /// listed pairs override the defaults.
  static CostModel from_json(const nlohmann::json& j);
  static CostModel load(const std::string& path);
  nlohmann::json to_json() const;

 private:
  static std::size_t idx(Action a) { return static_cast<std::size_t>(a); }
  double lambda_ = 1.0;
  std::array<std::array<double, kActionCount>, kActionCount> table_{};
};

/// Weighted Levenshtein distance turning `from` into `to`.
double behavior_distance(const ActionSequence& from, const ActionSequence& to, const CostModel& costs = {});

/// Sum of pointwise distances after arc-length resampling both paths to `mu` points.
double trajectory_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b, std::size_t mu = 50);

/// Paths of the participants of one scenario.
using ScenarioPaths = std::vector<std::vector<Vec2>>;

std::vector<Vec2> path_of(const Trajectory& t);

/// Mean trajectory distance over all l x c participant pairs.
double scenario_distance(const ScenarioPaths& s1, const ScenarioPaths& s2, std::size_t mu = 50);

/// Largest scenario distance between `sf` and a member of `z`; 0 for empty z.
double variation_range(const ScenarioPaths& sf, const std::vector<ScenarioPaths>& z, std::size_t mu = 50);

/// One extracted element: its attribute values in a fixed order.
using Element = std::vector<std::string>;
/// Elements of one scenario for one category.
using ScenarioElements = std::vector<Element>;

enum class SuaCategory : std::uint8_t { road, ego_task, participant, relative_position };
std::string_view to_string(SuaCategory c);

/// Elements of `a` for a category: road -> {road type, signal}; ego_task ->
/// {vehicle type, behaviors}; participant -> per non-ego participant {role,
/// type, behaviors}; relative_position -> per non-ego participant {role, position}.
ScenarioElements elements_of(const abstraction::AbstractScenario& a, SuaCategory c);

/// Fraction of ground-truth elements whose attributes all match the extraction
/// at the same position. Throws on scenario count mismatch or an empty set.
double sua(const std::vector<ScenarioElements>& extracted, const std::vector<ScenarioElements>& truth);

/// Fraction of scenarios whose element results are all true. Throws on an empty set.
double csc(const std::vector<std::vector<bool>>& element_results);

/// Per-participant equivalence results of one concrete scenario against its abstract.
std::vector<bool> element_results(const inspect::EquivalenceResult& r, const scenlang::ConcreteScenario& s);

}  // namespace scenforge::metrics
