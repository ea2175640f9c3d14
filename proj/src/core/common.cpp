// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "scenforge/common.hpp"

#include <algorithm>

namespace scenforge {

namespace {

constexpr std::array<std::string_view, kActionCount> kActionNames = {
    "follow_lane", "change_left", "change_right", "turn_left",     "turn_right",
    "cross",       "accelerate",  "decelerate",   "brake",         "stop",
    "drive_through", "walk_along", "walk_across", "stand"};

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<Enum>(i);
  }
  return std::nullopt;
}

constexpr std::array<std::string_view, 3> kRoadNames = {"straight", "intersection", "t_junction"};
constexpr std::array<std::string_view, 3> kTypeNames = {"car", "truck", "pedestrian"};
constexpr std::array<std::string_view, 9> kPositionNames = {
    "ahead",       "behind",        "left_front",     "right_front", "left_behind",
    "right_behind", "left_vertical", "right_vertical", "opposite"};

}  // namespace

std::string_view to_string(Action a) { return kActionNames[static_cast<std::size_t>(a)]; }

std::optional<Action> action_from_string(std::string_view s) {
  return lookup<Action>(kActionNames, s);
}

bool is_pedestrian_action(Action a) {
  return a == Action::walk_along || a == Action::walk_across || a == Action::stand ||
         a == Action::cross;
}

bool is_vehicle_action(Action a) {
  return a != Action::walk_along && a != Action::walk_across && a != Action::stand;
}

bool is_longitudinal_action(Action a) {
  return a == Action::accelerate || a == Action::decelerate || a == Action::brake ||
         a == Action::stop || a == Action::stand;
}

std::string to_string(const ActionSequence& seq) {
  std::string out = "[";
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) out += ", ";
    out += to_string(seq[i]);
  }
  out += "]";
  return out;
}

std::string_view to_string(RoadType r) { return kRoadNames[static_cast<std::size_t>(r)]; }

std::optional<RoadType> road_type_from_string(std::string_view s) {
  return lookup<RoadType>(kRoadNames, s);
}

std::string_view to_string(ParticipantType t) { return kTypeNames[static_cast<std::size_t>(t)]; }

std::optional<ParticipantType> participant_type_from_string(std::string_view s) {
  return lookup<ParticipantType>(kTypeNames, s);
}

std::string_view to_string(RelativePosition p) {
  return kPositionNames[static_cast<std::size_t>(p)];
}

std::optional<RelativePosition> relative_position_from_string(std::string_view s) {
  return lookup<RelativePosition>(kPositionNames, s);
}

}  // namespace scenforge
