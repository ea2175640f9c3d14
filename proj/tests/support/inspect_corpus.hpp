// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "scenforge/inspect.hpp"

namespace scenforge::testing {

/// A scenario program broken in exactly one way.
struct AdversarialCase {
  std::string name;
  std::string program;
  inspect::Constraint constraint;
  std::string participant;  // who the single diagnostic names
};

inline std::string with_ego(const std::string& body,
                            const std::string& ego = "start (\"lane_222\"->10) destination (\"lane_222\"->130)") {
  return "map \"fixture_map\"\nego car { " + ego + " }\n" + body;
}

/// Ten cases per constraint family on the fixture map.
inline std::vector<AdversarialCase> adversarial_corpus() {
  using C = inspect::Constraint;
  std::vector<AdversarialCase> out;
  auto add = [&](std::string name, std::string body, C c, std::string who) {
    out.push_back({std::move(name), with_ego(body), c, std::move(who)});
  };
  auto add_ego = [&](std::string name, std::string ego, C c) {
    out.push_back({std::move(name), with_ego("", ego), c, "ego"});
  };

  // Heading: motion against lane direction, unreachable destinations, bad references.
  add("h01_backwards_left_lane", "npc car a ((\"lane_223\"->100, ,5), (\"lane_223\"->40, ,5))\n", C::heading, "a");
  add("h02_backwards_right_lane", "npc car a ((\"lane_221\"->120, ,8), (\"lane_221\"->60, ,8))\n", C::heading, "a");
  add("h03_backwards_next_road", "npc truck a ((\"lane_232\"->90, ,6), (\"lane_232\"->20, ,6))\n", C::heading, "a");
  add("h04_up_the_exit_arm", "npc car a ((\"int_s_out1\"->100, ,6), (\"int_s_out1\"->20, ,6))\n", C::heading, "a");
  add("h05_free_points_against_flow", "npc car a (([120, 4.5], ,7), ([60, 4.5], ,7))\n", C::heading, "a");
  add("h06_tjunction_wrong_way", "npc car a ((\"tj_w_in0\"->100, ,5), (\"tj_w_in0\"->30, ,5))\n", C::heading, "a");
  add_ego("h07_ego_destination_behind", "start (\"lane_222\"->100) destination (\"lane_222\"->20)", C::heading);
  add_ego("h08_ego_destination_upstream_road", "start (\"lane_232\"->10) destination (\"lane_222\"->100)",
          C::heading);
  add("h09_unknown_lane", "npc car a ((\"lane_999\"->10, ,5), (\"lane_223\"->50, ,5))\n", C::heading, "scenario");
  add("h10_offset_past_lane_end", "npc car a ((\"lane_223\"->60, ,5), (\"lane_223\"->170, ,5))\n", C::heading,
      "scenario");

  // Spatial: initial footprints closer than 5 m.
  add("s01_same_lane_3m", "npc car a ((\"lane_223\"->40, ,5), (\"lane_223\"->100, ,5))\n"
      "npc car b ((\"lane_223\"->47.7, ,5), (\"lane_223\"->110, ,5))\n", C::spatial, "b");
  add("s02_on_top_of_ego", "npc car a ((\"lane_222\"->12, ,5), (\"lane_222\"->100, ,5))\n", C::spatial, "a");
  add("s03_beside_ego", "npc car a ((\"lane_223\"->10, ,5), (\"lane_223\"->100, ,5))\n", C::spatial, "a");
  add("s04_diagonal_to_ego", "npc car a ((\"lane_221\"->16, ,5), (\"lane_221\"->100, ,5))\n", C::spatial, "a");
  add("s05_truck_tail", "npc truck a ((\"lane_221\"->60, ,5), (\"lane_221\"->120, ,5))\n"
      "npc car b ((\"lane_221\"->69, ,5), (\"lane_221\"->130, ,5))\n", C::spatial, "b");
  add("s06_third_car_crowds_second", "npc car a ((\"lane_223\"->40, ,5), (\"lane_223\"->70, ,5))\n"
      "npc car b ((\"lane_223\"->95, ,5), (\"lane_223\"->130, ,5))\n"
      "npc car c ((\"lane_223\"->102, ,5), (\"lane_223\"->140, ,5))\n", C::spatial, "c");
  add("s07_walker_at_the_kerb", "npc car a ((\"lane_221\"->60, ,5), (\"lane_221\"->120, ,5))\n"
      "pedestrian p (([60, -8], ,1.4, t=0), ([100, -8], ,1.4, t=28.6))\n", C::spatial, "p");
  add("s08_two_walkers_abreast", "pedestrian p (([60, -9], ,1.4, t=0), ([100, -9], ,1.4, t=28.6))\n"
      "pedestrian q (([60, -10.5], ,1.4, t=0), ([100, -10.5], ,1.4, t=28.6))\n", C::spatial, "q");
  add("s09_queue_at_junction", "npc car a ((\"int_s_in1\"->100, ,5), (\"int_s_in1\"->119, ,5))\n"
      "npc car b ((\"int_s_in1\"->93, ,5), (\"int_s_in1\"->118, ,5))\n", C::spatial, "b");
  add("s10_walker_in_front_of_ego", "pedestrian p (([14, -3], ,1.4, t=0), ([14, -12], ,1.4, t=6.5))\n", C::spatial,
      "p");

  // Speed: a waypoint above the 13.9 m/s limit.
  add("v01_first_waypoint", "npc car a ((\"lane_223\"->40, ,20), (\"lane_223\"->120, ,10))\n", C::speed, "a");
  add("v02_last_waypoint", "npc car a ((\"lane_223\"->40, ,10), (\"lane_223\"->120, ,14.5))\n", C::speed, "a");
  add("v03_middle_waypoint", "npc car a ((\"lane_221\"->30, ,8), (\"lane_221\"->80, ,16), (\"lane_221\"->140, ,8))\n",
      C::speed, "a");
  add("v04_truck", "npc truck a ((\"lane_223\"->50, ,13.95), (\"lane_223\"->140, ,12))\n", C::speed, "a");
  add("v05_next_road", "npc car a ((\"lane_232\"->10, ,25), (\"lane_232\"->120, ,12))\n", C::speed, "a");
  add("v06_junction_arm", "npc car a ((\"int_s_in1\"->20, ,9), (\"int_s_in1\"->110, ,30))\n", C::speed, "a");
  add("v07_free_points", "npc car a (([40, 4.5], ,12), ([120, 4.5], ,18))\n", C::speed, "a");
  add("v08_second_npc_only", "npc car a ((\"lane_223\"->40, ,10), (\"lane_223\"->120, ,10))\n"
      "npc car b ((\"lane_221\"->40, ,10), (\"lane_221\"->120, ,15))\n", C::speed, "b");
  add("v09_tjunction", "npc car a ((\"tj_w_in0\"->20, ,14), (\"tj_w_in0\"->100, ,10))\n", C::speed, "a");
  add("v10_sprinting_on_the_road", "pedestrian p (([60, -3], ,1.4), ([60, 3], ,20))\n", C::speed, "p");

  // Temporal: times out of order, unreachable timed legs, distance at zero speed.
  add("t01_100m_in_1s", "npc car a ((\"lane_223\"->30, ,5, t=0), (\"lane_223\"->130, ,5, t=1))\n", C::temporal, "a");
  add("t02_deadline_before_arrival", "npc car a ((\"lane_223\"->30, ,5, t=4), (\"lane_223\"->80, ,5), (\"lane_223\"->100, ,5, t=5))\n", C::temporal, "a");
  add("t03_deadline_behind_untimed_leg", "npc car a ((\"lane_221\"->30, ,5), (\"lane_221\"->80, ,5), (\"lane_221\"->130, ,5, t=8))\n", C::temporal,
      "a");
  add("t04_zero_speed_leg", "npc car a ((\"lane_223\"->30, ,0), (\"lane_223\"->80, ,0))\n", C::temporal, "a");
  add("t05_fast_crossing", "pedestrian p (([60, -9], ,1.4, t=0), ([60, 9], ,1.4, t=2))\n", C::temporal, "p");
  add("t06_second_leg_late", "npc car a ((\"lane_223\"->30, ,8), (\"lane_223\"->60, ,8), (\"lane_223\"->140, ,8, t=6))\n",
      C::temporal, "a");
  add("t07_truck_sprint", "npc truck a ((\"lane_221\"->40, ,10, t=0), (\"lane_221\"->140, ,10, t=5))\n", C::temporal,
      "a");
  add("t08_junction_arm", "npc car a ((\"int_s_in1\"->10, ,6, t=0), (\"int_s_in1\"->110, ,6, t=3))\n", C::temporal,
      "a");
  add("t09_free_points_zero_speed", "npc car a (([40, 4.5], ,0), ([90, 4.5], ,0))\n", C::temporal, "a");
  add("t10_walker_needs_jog", "pedestrian p (([60, -9], ,0, t=0), ([60, -9], ,0, t=3), ([60, 9], ,1.4, t=8))\n",
      C::temporal, "p");
  return out;
}

}  // namespace scenforge::testing
