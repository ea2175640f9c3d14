// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scenforge {

// Failure classes; the C API and CLI map these onto status and exit codes.
enum class ErrorKind {
  domain,        // the operation ran but could not produce a result
  precondition,  // caller handed in inputs outside the contract
  usage,         // bad arguments or configuration
  io,            // missing or unreadable files
  parse,         // malformed text input
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::precondition, what);
}

/// Behavioral actions recognised for vehicles and pedestrians.
enum class Action : std::uint8_t {
  follow_lane,
  change_left,
  change_right,
  turn_left,
  turn_right,
  cross,
  accelerate,
  decelerate,
  brake,
  stop,
  drive_through,
  walk_along,
  walk_across,
  stand,
};

inline constexpr std::size_t kActionCount = 14;

inline constexpr std::array<Action, kActionCount> kAllActions = {
    Action::follow_lane, Action::change_left, Action::change_right, Action::turn_left,
    Action::turn_right,  Action::cross,       Action::accelerate,   Action::decelerate,
    Action::brake,       Action::stop,        Action::drive_through, Action::walk_along,
    Action::walk_across, Action::stand};

std::string_view to_string(Action a);
std::optional<Action> action_from_string(std::string_view s);

bool is_pedestrian_action(Action a);
bool is_vehicle_action(Action a);
bool is_longitudinal_action(Action a);

using ActionSequence = std::vector<Action>;

std::string to_string(const ActionSequence& seq);

enum class RoadType : std::uint8_t { straight, intersection, t_junction };

std::string_view to_string(RoadType r);
std::optional<RoadType> road_type_from_string(std::string_view s);

enum class ParticipantType : std::uint8_t { car, truck, pedestrian };

std::string_view to_string(ParticipantType t);
std::optional<ParticipantType> participant_type_from_string(std::string_view s);

/// Position of a participant relative to the ego vehicle's initial position.
enum class RelativePosition : std::uint8_t {
  ahead,
  behind,
  left_front,
  right_front,
  left_behind,
  right_behind,
  left_vertical,
  right_vertical,
  opposite,
};

inline constexpr std::array<RelativePosition, 9> kAllRelativePositions = {
    RelativePosition::ahead,          RelativePosition::behind,        RelativePosition::left_front,
    RelativePosition::right_front,    RelativePosition::left_behind,   RelativePosition::right_behind,
    RelativePosition::left_vertical,  RelativePosition::right_vertical, RelativePosition::opposite};

std::string_view to_string(RelativePosition p);
std::optional<RelativePosition> relative_position_from_string(std::string_view s);

}  // namespace scenforge
