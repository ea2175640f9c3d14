// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "../support/edit_oracle.hpp"
#include "scenforge/metrics.hpp"

using namespace scenforge;
using namespace scenforge::metrics;

namespace {

const ActionSequence kHuman = {Action::follow_lane, Action::decelerate, Action::change_right, Action::accelerate,
                               Action::cross};
const ActionSequence kEgo = {Action::follow_lane, Action::brake,      Action::change_right,
                             Action::accelerate,  Action::decelerate, Action::cross};

}  // namespace

TEST_CASE("default cost table") {
  const CostModel c;
  CHECK(c.lambda() == 1.0);
  CHECK(c.replace(Action::brake, Action::decelerate) == 0.5);
  CHECK(c.replace(Action::stand, Action::walk_across) == 0.5);
  CHECK(c.replace(Action::change_left, Action::change_right) == 2.0);
  CHECK(c.replace(Action::turn_right, Action::turn_left) == 2.0);
  CHECK(c.replace(Action::change_left, Action::brake) == 1.0);
  for (Action a : kAllActions) {
    CHECK(c.replace(a, a) == 0.0);
    for (Action b : kAllActions) CHECK(c.replace(a, b) == c.replace(b, a));
  }
}

TEST_CASE("worked behavior pair") {
  CHECK(behavior_distance(kEgo, kHuman) == 1.5);
  CHECK(behavior_distance(kHuman, kEgo) == 1.5);
  CHECK(behavior_distance(kHuman, kHuman) == 0.0);
  CHECK(behavior_distance({}, {}) == 0.0);
  CHECK(behavior_distance({}, kHuman) == 5.0);
}

TEST_CASE("dynamic programme matches exhaustive edit scripts") {
  const auto seqs = testing::all_sequences(testing::oracle_alphabet(), 3);
  const CostModel c;
  std::size_t checked = 0;
  for (const auto& a : seqs)
    for (const auto& b : seqs) {
      REQUIRE(behavior_distance(a, b, c) == doctest::Approx(testing::brute_force_edit(a, 0, b, 0, c)).epsilon(1e-12));
      ++checked;
    }
  CHECK(checked == seqs.size() * seqs.size());
}

TEST_CASE("scaling costs preserves candidate ranking") {
  std::mt19937_64 rng(11);
  const auto seqs = testing::all_sequences(testing::oracle_alphabet(), 4);
  std::uniform_int_distribution<std::size_t> pick(0, seqs.size() - 1);
  CostModel base, scaled;
  scaled.set_lambda(3.0);
  for (Action a : kAllActions)
    for (Action b : kAllActions) scaled.set_replace(a, b, 3.0 * base.replace(a, b));
  for (int round = 0; round < 50; ++round) {
    const auto& target = seqs[pick(rng)];
    std::vector<std::size_t> cands(20);
    for (auto& k : cands) k = pick(rng);
    auto rank = [&](const CostModel& c) {
      auto r = cands;
      std::stable_sort(r.begin(), r.end(), [&](std::size_t x, std::size_t y) {
        return behavior_distance(seqs[x], target, c) > behavior_distance(seqs[y], target, c);
      });
      return r;
    };
    CHECK(rank(base) == rank(scaled));
  }
}

TEST_CASE("cost model json") {
  const auto m = CostModel::from_json(nlohmann::json::parse(R"({"lambda_indel": 2, "replacement": {"brake,stop": 0.25}})"));
  CHECK(m.lambda() == 2.0);
  CHECK(m.replace(Action::stop, Action::brake) == 0.25);
  CHECK(m.replace(Action::brake, Action::decelerate) == 0.5);
  const auto round = CostModel::from_json(m.to_json());
  for (Action a : kAllActions)
    for (Action b : kAllActions) CHECK(round.replace(a, b) == m.replace(a, b));
  CHECK_THROWS(CostModel::from_json(nlohmann::json::parse(R"({"replacement": {"brake,stop": -1}})")));
  CHECK_THROWS(CostModel::from_json(nlohmann::json::parse(R"({"replacement": {"brake,stop": 1, "stop,brake": 2}})")));
  CHECK_THROWS(CostModel::from_json(nlohmann::json::parse(R"({"replacement": {"brake,brake": 1}})")));
  CHECK_THROWS(CostModel::from_json(nlohmann::json::parse(R"({"replacement": {"brake;stop": 1}})")));
  CHECK_THROWS(CostModel::from_json(nlohmann::json::parse(R"({"replacement": {"brake,fly": 1}})")));
}

TEST_CASE("trajectory distance") {
  CHECK(trajectory_distance({{0, 0}, {3, 4}}, {{0, 0}, {0, 0}}, 2) == 5.0);
  CHECK(trajectory_distance({{0, 0}, {3, 4}}, {{0, 0}, {3, 4}}) == 0.0);
  CHECK_THROWS(trajectory_distance({{0, 0}}, {{1, 1}}, 1));
  CHECK_THROWS(trajectory_distance({}, {{1, 1}}));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int i = 0; i < 100; ++i) {
    std::vector<Vec2> a(2 + i % 7), b(3 + i % 5);
    for (auto& p : a) p = {u(rng), u(rng)};
    for (auto& p : b) p = {u(rng), u(rng)};
    const double s = 0.5 + (i % 9);
    auto scale = [&](std::vector<Vec2> v) {
      for (auto& p : v) p = p * s;
      return v;
    };
    const double td = trajectory_distance(a, b);
    CHECK(td >= 0.0);
    CHECK(trajectory_distance(scale(a), scale(b)) == doctest::Approx(s * td).epsilon(1e-9));
    CHECK(trajectory_distance(a, a) == 0.0);
  }
}

TEST_CASE("scenario distance and variation range") {
  const ScenarioPaths s1 = {{{0, 0}, {3, 4}}};
  const ScenarioPaths s2 = {{{0, 0}, {0, 0}}};
  CHECK(scenario_distance(s1, s1, 2) == 0.0);
  CHECK(scenario_distance(s1, s2, 2) == 5.0);

  const ScenarioPaths a = {{{0, 0}, {3, 4}}, {{1, 0}, {1, 10}}};
  const ScenarioPaths b = {{{0, 0}, {0, 0}}, {{2, 0}, {2, 7}}};
  double sum = 0.0;
  for (const auto& x : a)
    for (const auto& y : b) sum += trajectory_distance(x, y, 2);
  CHECK(scenario_distance(a, b, 2) == doctest::Approx(sum / 4.0).epsilon(1e-12));
  CHECK_THROWS(scenario_distance({}, b));

  CHECK(variation_range(s1, {}, 2) == 0.0);
  CHECK(variation_range(s1, {s2}, 2) == 5.0);
  const ScenarioPaths far = {{{0, 0}, {0, 0}}};
  const ScenarioPaths farther = {{{0, 12}, {3, 16}}};
  CHECK(variation_range(s1, {s2, farther, far}, 2) == 24.0);
}

TEST_CASE("sua") {
  CHECK(sua({{{"intersection", "none"}}}, {{{"intersection", "none"}}}) == 1.0);
  const std::vector<ScenarioElements> truth = {{{"car", "follow_lane"}}, {{"truck", "cross"}}};
  const std::vector<ScenarioElements> got = {{{"car", "follow_lane"}}, {{"truck", "turn_left"}}};
  CHECK(sua(got, truth) == 0.5);
  CHECK_THROWS(sua({}, {}));
  CHECK_THROWS(sua(got, {truth[0]}));
  CHECK(sua({{}}, {{{"a"}, {"b"}}}) == 0.0);
}

TEST_CASE("csc") {
  CHECK(csc({{true, true}, {true}}) == 1.0);
  CHECK(csc({{true, true}, {true, false, true}, {true}, {true, true}}) == 0.75);
  CHECK_THROWS(csc({}));
}

TEST_CASE("elements of an abstract scenario") {
  abstraction::AbstractScenario a;
  a.road_type = RoadType::intersection;
  a.participants = {
      {abstraction::Role::ego, ParticipantType::car, {Action::turn_right}, std::nullopt, std::nullopt},
      {abstraction::Role::npc, ParticipantType::truck, {Action::cross}, RelativePosition::left_front, std::nullopt},
  };
  CHECK(elements_of(a, SuaCategory::road) == ScenarioElements{{"intersection", "none"}});
  CHECK(elements_of(a, SuaCategory::ego_task).size() == 1);
  CHECK(elements_of(a, SuaCategory::participant) == ScenarioElements{{"npc", "truck", "[cross]"}});
  CHECK(elements_of(a, SuaCategory::relative_position) == ScenarioElements{{"npc", "left_front"}});
}
