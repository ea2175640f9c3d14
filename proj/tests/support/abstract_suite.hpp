// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "scenforge/abstraction.hpp"

namespace scenforge::testing {

/// Twenty abstract scenarios over the three road types of the fixture map.
inline std::vector<abstraction::AbstractScenario> abstract_suite() {
  using enum Action;
  using abstraction::ParticipantSpec;
  using abstraction::Role;
  using P = ParticipantType;
  using R = RelativePosition;
  auto ego = [](ActionSequence b) { return ParticipantSpec{Role::ego, P::car, std::move(b), std::nullopt, std::nullopt}; };
  auto npc = [](P t, R r, ActionSequence b) { return ParticipantSpec{Role::npc, t, std::move(b), r, std::nullopt}; };
  auto ped = [](R r, ActionSequence b) { return ParticipantSpec{Role::pedestrian, std::nullopt, std::move(b), r, std::nullopt}; };
  auto make = [](std::string id, RoadType road, std::vector<ParticipantSpec> ps) {
    abstraction::AbstractScenario a;
    a.id = std::move(id);
    a.road_type = road;
    a.participants = std::move(ps);
    return a;
  };
  const auto S = RoadType::straight;
  const auto I = RoadType::intersection;
  const auto T = RoadType::t_junction;
  return {
      make("s01_follow_right_front", S, {ego({follow_lane}), npc(P::car, R::right_front, {follow_lane})}),
      make("s02_change_left_slow_lead", S, {ego({change_left}), npc(P::car, R::ahead, {decelerate})}),
      make("s03_change_right_rear", S, {ego({change_right}), npc(P::truck, R::left_behind, {accelerate})}),
      make("s04_lead_brakes", S, {ego({follow_lane}), npc(P::car, R::ahead, {follow_lane, brake})}),
      make("s05_pedestrian_crossing", S, {ego({follow_lane, decelerate}), ped(R::right_front, {cross})}),
      make("s06_cut_in", S, {ego({follow_lane}), npc(P::car, R::left_front, {change_right, follow_lane})}),
      make("s07_drive_through_rear", S, {ego({drive_through}), npc(P::car, R::behind, {follow_lane, change_left})}),
      make("s08_stop_and_walk", S,
           {ego({follow_lane}), npc(P::car, R::right_front, {follow_lane, stop}), ped(R::left_front, {walk_along})}),
      make("i01_table1", I,
           {ego({change_left, turn_right}), npc(P::truck, R::left_front, {follow_lane, cross}),
            ped(R::right_vertical, {stand, cross})}),
      make("i02_left_turn_oncoming", I, {ego({turn_left}), npc(P::car, R::opposite, {follow_lane, cross})}),
      make("i03_cross_right_turner", I, {ego({cross}), npc(P::car, R::right_vertical, {follow_lane, turn_right})}),
      make("i04_right_turn_walker", I, {ego({turn_right}), ped(R::right_vertical, {walk_along, cross})}),
      make("i05_cross_side_stop", I, {ego({follow_lane, cross}), npc(P::car, R::left_vertical, {decelerate, stop})}),
      make("i06_change_right_turn", I, {ego({change_right, turn_right}), npc(P::car, R::ahead, {follow_lane, turn_right})}),
      make("i07_rear_crosser", I, {ego({cross}), npc(P::truck, R::behind, {follow_lane, cross})}),
      make("t01_left_turn_cross_traffic", T, {ego({turn_left}), npc(P::car, R::right_vertical, {follow_lane, cross})}),
      make("t02_right_turn_pedestrian", T, {ego({turn_right}), ped(R::left_front, {stand, walk_along})}),
      make("t03_cross_oncoming_turn", T, {ego({cross}), npc(P::car, R::opposite, {follow_lane, turn_left})}),
      make("t04_side_merge", T, {ego({follow_lane}), npc(P::car, R::left_front, {change_right, decelerate})}),
      make("t05_left_turn_mixed", T,
           {ego({turn_left}), npc(P::car, R::ahead, {follow_lane, turn_left}), ped(R::right_vertical, {cross})}),
  };
}

/// Straight road, one car crawling ahead of the ego at 0.5 m/s.
inline abstraction::AbstractScenario slow_npc_abstract() {
  using abstraction::ParticipantSpec;
  using abstraction::Role;
  abstraction::AbstractScenario a;
  a.id = "slow_npc_ahead";
  a.road_type = RoadType::straight;
  a.participants = {
      ParticipantSpec{Role::ego, ParticipantType::car, {Action::follow_lane}, std::nullopt, std::nullopt},
      ParticipantSpec{Role::npc, ParticipantType::car, {Action::follow_lane}, RelativePosition::ahead, 0.5},
  };
  return a;
}

}  // namespace scenforge::testing
