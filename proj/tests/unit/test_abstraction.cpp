// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "doctest.h"
#include "scenforge/abstraction.hpp"

using namespace scenforge;
using namespace scenforge::abstraction;

namespace {

AnnotationLog table1_log() {
  return load_annotation(std::string(SCENFORGE_DATA_DIR) + "/fixtures/annotations/table1_intersection.json");
}

bool contains(const std::string& hay, std::string_view needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("understanding prompt") {
  const std::string p5 = build_understanding_prompt(5);
  CHECK(contains(p5, "road types"));
  CHECK(contains(p5, "behaviors and positions of traffic participants"));
  const std::string p1 = build_understanding_prompt(1);
  CHECK(contains(p1, "road types"));
  CHECK(p1.size() == p5.size());
  CHECK_THROWS_AS(build_understanding_prompt(0), Error);
}

TEST_CASE("mock provider round trip on the intersection log") {
  MockProvider mock;
  SceneInput in;
  in.log = table1_log();
  const SceneDescription d = describe_scene(mock, in);
  CHECK(d.source == Source::mock);
  CHECK(contains(d.raw_text, "ROAD: intersection"));
  CHECK(contains(d.raw_text, "EGO: car"));
  CHECK(contains(d.raw_text, "NPC[1]: truck"));
  CHECK(contains(d.raw_text, "PED[1]"));

  const AbstractScenario a = parse_description(d);
  CHECK(a.road_type == RoadType::intersection);
  REQUIRE(a.participants.size() == 3);
  CHECK(a.ego().behaviors == ActionSequence{Action::change_left, Action::turn_right});
  const auto npc = a.with_role(Role::npc);
  REQUIRE(npc.size() == 1);
  CHECK(npc[0]->vehicle_type == ParticipantType::truck);
  CHECK(npc[0]->relative_position == RelativePosition::left_front);
  CHECK(npc[0]->behaviors == ActionSequence{Action::follow_lane, Action::cross});
  const auto ped = a.with_role(Role::pedestrian);
  REQUIRE(ped.size() == 1);
  CHECK_FALSE(ped[0]->vehicle_type.has_value());
  CHECK(ped[0]->relative_position == RelativePosition::right_vertical);
  CHECK(ped[0]->behaviors == ActionSequence{Action::stand, Action::cross});
  // The undirected lane change is flagged.
  REQUIRE(a.notes.size() == 1);
  CHECK(contains(a.notes[0], "assumed change_left"));

  // Serialisation is deterministic and lossless.
  CHECK(abstract_from_json(to_json(a)) == a);
  CHECK(to_json(parse_description(describe_scene(mock, in))).dump() == to_json(a).dump());
}

TEST_CASE("ego-only log") {
  AnnotationLog log;
  log.road = RoadType::straight;
  log.participants.push_back({Role::ego, ParticipantType::car, {"follow_lane"}, {}, {}, {}});
  MockProvider mock;
  SceneInput in;
  in.log = log;
  const auto a = parse_description(describe_scene(mock, in));
  REQUIRE(a.participants.size() == 1);
  CHECK(a.road_type == RoadType::straight);
}

TEST_CASE("parse_description") {
  SUBCASE("minimal") {
    const auto a = parse_description({"ROAD: straight road\nEGO: car; BEHAVIORS: follow lane\n"});
    CHECK(a.participants.size() == 1);
    CHECK(a.ego().behaviors == ActionSequence{Action::follow_lane});
  }
  SUBCASE("directed lane change and synonyms") {
    const auto a = parse_description({"road: Straight\nego: Car; behaviors: change lane to the right, slow down\n"
                                      "NPC[2]: lorry; BEHAVIORS: keep lane; POS: in front; SPEED: 0.5\n"
                                      "PED[1]: BEHAVIORS: walk-along; POS: rear left\n"
                                      "this line is free text\n"});
    CHECK(a.ego().behaviors == ActionSequence{Action::change_right, Action::decelerate});
    CHECK(a.with_role(Role::npc)[0]->relative_position == RelativePosition::ahead);
    CHECK(a.with_role(Role::npc)[0]->speed == 0.5);
    CHECK(a.with_role(Role::pedestrian)[0]->relative_position == RelativePosition::left_behind);
    REQUIRE(a.notes.size() == 1);
    CHECK(contains(a.notes[0], "unparsed line 5"));
  }
  SUBCASE("errors") {
    CHECK_THROWS_WITH_AS(parse_description({"ROAD: straight\nEGO: car; BEHAVIORS: teleport\n"}),
                         doctest::Contains("unknown action 'teleport'"), Error);
    CHECK_THROWS_AS(parse_description({"ROAD: straight\n"}), Error);
    CHECK_THROWS_AS(parse_description({"ROAD: roundabout\nEGO: car; BEHAVIORS: stop\n"}), Error);
    CHECK_THROWS_AS(parse_description({"ROAD: straight\nEGO: car; BEHAVIORS: walk along\n"}), Error);
    CHECK_THROWS_AS(parse_description({""}), Error);
  }
}

TEST_CASE("remote provider") {
  httplib::Server server;
  std::atomic<int> calls{0};
  server.Post("/v1/describe", [&](const httplib::Request& req, httplib::Response& res) {
    const int n = ++calls;
    const auto body = nlohmann::json::parse(req.body);
    CHECK(body.contains("prompt"));
    CHECK(body["images"].size() == 1);
    CHECK(req.get_header_value("Authorization") == "Bearer secret");
    if (n == 1) {
      res.status = 500;
      return;
    }
    if (n == 2) {
      res.set_content(R"({"text": "ROAD: moon base\nEGO: car; BEHAVIORS: follow lane"})", "application/json");
      return;
    }
    res.set_content(R"({"text": "ROAD: straight\nEGO: car; BEHAVIORS: follow lane"})", "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  SceneInput in;
  in.key_frames.push_back({2, 2, {0, 1, 2, 3}, 0.0});
  RemoteProvider remote({"http://127.0.0.1:" + std::to_string(port) + "/v1/describe", "secret", 3, 5.0});
  // 500, then an unparseable answer that triggers one re-prompt, then success.
  const AbstractScenario a = understand_scene(remote, in, 2);
  CHECK(a.road_type == RoadType::straight);
  CHECK(calls == 3);

  server.stop();
  th.join();

  SUBCASE("unreachable endpoint fails after the configured retries") {
    RemoteProvider dead({"http://127.0.0.1:" + std::to_string(port) + "/v1/describe", "", 3, 0.5});
    try {
      describe_scene(dead, in);
      FAIL("expected ProviderError");
    } catch (const ProviderError& e) {
      CHECK(e.attempts() == 3);
      CHECK(e.kind() == ErrorKind::io);
    }
  }
}
