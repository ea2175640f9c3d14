// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <set>

#include "scenforge/sim.hpp"

using namespace scenforge;
using namespace scenforge::sim;

namespace {

const RoadMap& fixture_map() {
  static const RoadMap m = RoadMap::load(std::string(SCENFORGE_DATA_DIR) + "/maps/fixture_map.json");
  return m;
}

scenlang::ConcreteScenario scenario(const std::string& ego, const std::string& body = "") {
  return scenlang::parse_scenario_or_throw("map \"fixture_map\"\n" + ego + "\n" + body);
}

const char* kStraightEgo = "ego car { start (\"lane_222\"->10) destination (\"lane_222\"->130) }";

class IdlePolicy final : public EgoPolicy {
 public:
  std::string name() const override { return "idle"; }
  void reset(const PolicyContext&) override {}
  Command step(const Observation&) override { return {}; }
};

class ThrowingPolicy final : public EgoPolicy {
 public:
  std::string name() const override { return "throwing"; }
  void reset(const PolicyContext&) override {}
  Command step(const Observation& o) override {
    if (o.time > 1.0) throw std::runtime_error("controller crashed");
    return {5.0, 0.0};
  }
};

ExecutionTrace run(const scenlang::ConcreteScenario& s, const std::string& policy, double dt = 0.1) {
  auto p = make_policy(policy);
  SimOptions o;
  o.dt = dt;
  return run_scenario(s, fixture_map(), *p, o);
}

bool violated(const std::vector<Verdict>& vs, scenlang::AssertionKind k) {
  for (const auto& v : vs)
    if (v.assertion.kind == k) return v.status == VerdictStatus::violated;
  return false;
}

EntityState car(const std::string& id, Vec2 pos, double heading = 0.0) {
  EntityState e;
  e.id = id;
  e.pos = pos;
  e.heading = heading;
  e.half_length = 2.35;
  e.half_width = 0.9;
  return e;
}

}  // namespace

TEST_CASE("idle ego without npcs runs to the horizon") {
  IdlePolicy idle;
  const auto t = run_scenario(scenario(kStraightEgo), fixture_map(), idle);
  CHECK(t.termination == Termination::horizon);
  CHECK(t.steps.size() == 601);
  CHECK(t.steps.back().time == doctest::Approx(60.0));
  CHECK(t.steps.back().entities[0].pos.x == doctest::Approx(10.0));
  const auto v = monitor_assertions(t, scenlang::default_assertions(), destination_of(scenario(kStraightEgo), fixture_map()));
  REQUIRE(v.size() == 3);
  CHECK(v[0].status == VerdictStatus::satisfied);
  CHECK(v[1].status == VerdictStatus::satisfied);
  CHECK(v[2].status == VerdictStatus::violated);
}

TEST_CASE("scripted npc arrives on time") {
  IdlePolicy idle;
  const auto s = scenario(kStraightEgo, "npc car a ((\"lane_223\"->50, ,5), (\"lane_223\"->60, ,5))\n");
  const auto t = run_scenario(s, fixture_map(), idle);
  const auto& a = t.trajectories.at("a");
  CHECK(a.back().t == doctest::Approx(2.0).epsilon(0.06));
  CHECK(a.back().pos.x == doctest::Approx(60.0));
  CHECK_FALSE(t.steps.back().entities[1].active);
}

TEST_CASE("head-on collision terminates the run") {
  IdlePolicy idle;
  const auto s = scenario(kStraightEgo, "npc car a (([60, 0], ,10), ([0, 0], ,10))\n");
  const auto t = run_scenario(s, fixture_map(), idle);
  CHECK(t.termination == Termination::collision);
  const auto v = monitor_assertions(t, s.assertions, destination_of(s, fixture_map()));
  CHECK(violated(v, scenlang::AssertionKind::never_collision));
  CHECK(v[0].step == t.steps.size() - 1);
}

TEST_CASE("collision detection") {
  WorldState w;
  w.entities = {car("a", {0, 0}), car("b", {10, 0})};
  CHECK(detect_collision(w).empty());
  w.entities[1].pos = {0, 0};
  CHECK(detect_collision(w).size() == 1);
  // Corner of a 45 degree box pressed 5 mm into the side of another: within tolerance.
  const double reach = std::sqrt(2.0) * 0.5;
  EntityState sq;
  sq.id = "sq";
  sq.half_length = sq.half_width = 0.5;
  sq.heading = std::numbers::pi / 4;
  sq.pos = {0.0, 0.9 + reach - 0.005};
  w.entities = {car("a", {0, 0}), sq};
  CHECK(detect_collision(w).empty());
  w.entities[1].pos.y = 0.9 + reach - 0.05;
  CHECK(detect_collision(w).size() == 1);
  w.entities[1].active = false;
  CHECK(detect_collision(w).empty());
}

TEST_CASE("assertion monitor on constructed traces") {
  ExecutionTrace t;
  for (int k = 0; k <= 300; ++k) {
    WorldState w;
    w.time = k * 0.1;
    w.entities = {car("ego", {k * 0.4, 0}), car("npc", {k * 0.4, 0.9 + 0.9 + 1.5})};
    t.steps.push_back(w);
  }
  using scenlang::Assertion;
  const auto v = monitor_assertions(
      t, {Assertion::never_collision(), Assertion::always_clearance(2.0), Assertion::eventually_at_destination(60, 3)},
      {120, 0});
  CHECK(v[0].status == VerdictStatus::satisfied);
  CHECK(v[1].status == VerdictStatus::violated);
  CHECK(v[1].step == 0u);
  CHECK(v[2].status == VerdictStatus::satisfied);
  CHECK(t.steps[*v[2].step].time <= 30.0);
  CHECK(monitor_assertions(t, {Assertion::always_clearance(1.4)}, {})[0].status == VerdictStatus::satisfied);
  CHECK_THROWS(monitor_assertions(ExecutionTrace{}, {}, {}));
}

TEST_CASE("clearance violations shrink with d_safe") {
  const auto s = scenario(kStraightEgo, "npc car slow ((\"lane_222\"->35, ,0.5), (\"lane_222\"->145, ,0.5))\n");
  const auto t = run(s, "lanekeeper-staticbug");
  const auto c = ego_clearances(t);
  std::size_t prev = c.size() + 1;
  for (double d : {3.0, 2.5, 2.0, 1.5, 1.0, 0.5}) {
    std::size_t n = 0;
    for (double x : c) n += x < d;
    CHECK(n <= prev);
    prev = n;
  }
}

TEST_CASE("policy registry") {
  for (const auto& n : builtin_policy_names()) CHECK(make_policy(n)->name() == n);
  CHECK_THROWS_AS(make_policy("autopilot"), Error);
}

TEST_CASE("policy faults truncate the trace") {
  ThrowingPolicy p;
  const auto t = run_scenario(scenario(kStraightEgo), fixture_map(), p);
  CHECK(t.termination == Termination::policy_fault);
  CHECK(t.fault == "controller crashed");
  CHECK(t.steps.back().time <= 1.2);
}

TEST_CASE("lanekeeper reaches its destination") {
  const auto s = scenario(kStraightEgo);
  const auto t = run(s, "lanekeeper");
  CHECK(t.termination == Termination::all_assertions_resolved);
  const auto v = monitor_assertions(t, s.assertions, destination_of(s, fixture_map()));
  for (const auto& x : v) CHECK(x.status == VerdictStatus::satisfied);
}

TEST_CASE("lanekeeper turns through junctions") {
  for (const char* ego : {"ego car { start (\"int_s_in0\"->20) destination (\"int_e_out0\"->60) }",
                          "ego car { start (\"int_s_in1\"->20) destination (\"int_w_out2\"->60) }",
                          "ego car { start (\"tj_w_in1\"->20) destination (\"tj_e_out1\"->60) }",
                          "ego truck { start (\"lane_221\"->10) destination (\"lane_233\"->60) }"}) {
    CAPTURE(ego);
    const auto s = scenario(ego);
    const auto t = run(s, "lanekeeper");
    const auto v = monitor_assertions(t, s.assertions, destination_of(s, fixture_map()));
    for (const auto& x : v) CHECK(x.status == VerdictStatus::satisfied);
  }
}

TEST_CASE("lanekeeper stops behind a stopped npc") {
  const auto s = scenario("ego car { start (\"int_s_in2\"->10) destination (\"int_s_in2\"->110) }",
                          "npc car parked ((\"int_s_in2\"->60, ,0), (\"int_s_in2\"->60, ,0, t=100))\n");
  const auto t = run(s, "lanekeeper");
  const auto c = ego_clearances(t);
  CHECK(*std::min_element(c.begin(), c.end()) >= 2.0);
  CHECK(t.steps.back().entities[0].speed < 0.1);
  const auto v = monitor_assertions(t, s.assertions, destination_of(s, fixture_map()));
  CHECK_FALSE(violated(v, scenlang::AssertionKind::never_collision));
  CHECK_FALSE(violated(v, scenlang::AssertionKind::always_clearance));
}

TEST_CASE("slow npc ahead: lanekeeper overtakes, staticbug violates clearance") {
  const auto s = scenario(kStraightEgo, "npc car slow ((\"lane_222\"->35, ,0.5), (\"lane_222\"->145, ,0.5))\n");
  const auto dest = destination_of(s, fixture_map());
  const auto good = monitor_assertions(run(s, "lanekeeper"), s.assertions, dest);
  for (const auto& x : good) CHECK(x.status == VerdictStatus::satisfied);
  const auto bad = monitor_assertions(run(s, "lanekeeper-staticbug"), s.assertions, dest);
  CHECK(violated(bad, scenlang::AssertionKind::always_clearance));
}

TEST_CASE("blind rear policy cuts in front of an accelerating vehicle") {
  // Ego must move left; a car in the left lane starts behind and accelerates past.
  const auto s = scenario("ego car { start (\"lane_222\"->30) destination (\"lane_233\"->60) }",
                          "npc car rear ((\"lane_223\"->5, ,4), (\"lane_223\"->60, ,13.5), (\"lane_233\"->100, ,13.5))\n");
  const auto dest = destination_of(s, fixture_map());
  const auto careful = monitor_assertions(run(s, "lanekeeper"), s.assertions, dest);
  const auto blind = monitor_assertions(run(s, "lanekeeper-blindrear"), s.assertions, dest);
  for (const auto& x : careful) {
    CAPTURE(x.detail);
    CHECK(x.status == VerdictStatus::satisfied);
  }
  CHECK((violated(blind, scenlang::AssertionKind::always_clearance) ||
         violated(blind, scenlang::AssertionKind::never_collision)));
}

TEST_CASE("scripted policy replays a recorded ego trajectory") {
  const auto s = scenario("ego car { start (\"int_s_in1\"->20) destination (\"int_w_out2\"->60) }");
  const auto recorded = run(s, "lanekeeper");
  PolicyOptions o;
  o.script = recorded.trajectories.at("ego");
  auto p = make_policy("scripted", o);
  const auto replay = run_scenario(s, fixture_map(), *p);
  const auto& a = recorded.trajectories.at("ego");
  const auto& b = replay.trajectories.at("ego");
  REQUIRE(b.size() == a.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, (a[i].pos - b[i].pos).norm());
  CHECK(worst < 0.1);
}

TEST_CASE("runs are deterministic and stable under dt refinement") {
  const std::vector<std::pair<std::string, std::string>> fixtures = {
      {kStraightEgo, "npc car slow ((\"lane_222\"->35, ,0.5), (\"lane_222\"->145, ,0.5))\n"},
      {kStraightEgo, "npc car a (([60, 0], ,10), ([0, 0], ,10))\n"},
      {"ego car { start (\"int_s_in0\"->20) destination (\"int_e_out0\"->60) }",
       "npc truck x ((\"int_w_in0\"->40, ,8), (\"int_e_out0\"->30, ,8))\n"},
  };
  for (const auto& [ego, body] : fixtures) {
    const auto s = scenario(ego, body);
    for (const char* policy : {"lanekeeper", "lanekeeper-staticbug"}) {
      CAPTURE(policy);
      CHECK(trace_to_jsonl(run(s, policy)) == trace_to_jsonl(run(s, policy)));
      const auto dest = destination_of(s, fixture_map());
      const bool coarse = violated(monitor_assertions(run(s, policy, 0.1), s.assertions, dest),
                                   scenlang::AssertionKind::never_collision);
      const bool fine = violated(monitor_assertions(run(s, policy, 0.05), s.assertions, dest),
                                 scenlang::AssertionKind::never_collision);
      CHECK(coarse == fine);
    }
  }
}

TEST_CASE("replay json and trace lines") {
  Replay r{"map \"x\"", "lanekeeper", 42, 0.1, 60};
  const auto back = Replay::from_json(r.to_json());
  CHECK(back.scenario == r.scenario);
  CHECK(back.policy == r.policy);
  CHECK(back.seed == 42u);
  CHECK_THROWS(Replay::from_json(nlohmann::json::object()));
  IdlePolicy idle;
  SimOptions o;
  o.horizon = 1.0;
  const auto t = run_scenario(scenario(kStraightEgo), fixture_map(), idle, o);
  const auto lines = trace_to_jsonl(t);
  CHECK(std::count(lines.begin(), lines.end(), '\n') == 11);
  CHECK(nlohmann::json::parse(lines.substr(0, lines.find('\n')))["entities"][0]["id"] == "ego");
}
