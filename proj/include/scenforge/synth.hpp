// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scenforge/abstraction.hpp"
#include "scenforge/inspect.hpp"
#include "scenforge/map.hpp"
#include "scenforge/scenlang.hpp"

namespace scenforge::synth {

/// A lane group of one road type and what a generator needs to know about it.
struct RoadSelection {
  std::string segment;
  RoadType type = RoadType::straight;
  std::vector<std::string> lanes;  // ascending ids

  /// One line per lane: id, heading in degrees, length in meters.
  std::string describe(const RoadMap& map) const;
};

/// Lowest segment id of the requested type, or the seed-th one when a seed is given.
RoadSelection select_road(const RoadMap& map, RoadType type, std::optional<std::uint64_t> seed = std::nullopt);

struct SynthOptions {
  double ego_start_offset = 10.0;    // m along the ego's first lane
  double ego_start_with_rear = 40.0; // used when someone starts behind the ego
  double front_gap = 15.0;           // front divisions begin this far ahead of the ego
  double behind_gap = 15.0;
  double stack_gap = 15.0;           // spacing between participants sharing a division
  double speed_factor = 0.8;         // base NPC speed as a fraction of the lane limit
  double turn_speed = 7.0;           // m/s cap for participants that turn
  double pedestrian_speed = 1.4;
  double crossing_setback = 18.0;    // m from a junction box to its crosswalks
  double curb_margin = 2.25;         // m beyond the outermost lane edge
  int repair_rounds = 3;
  double jitter_offset = 10.0;  // m, uniform +-
  double jitter_speed = 0.2;    // fraction, uniform +-
  scenlang::AssertionDefaults assertions;
};

/// Start and destination whose shortest lane route makes exactly the ego's
/// maneuvers. Throws a precondition error when the road cannot host them.
scenlang::EgoTask assign_ego_task(const RoadMap& map, const RoadSelection& road, const abstraction::ParticipantSpec& ego,
                                  const SynthOptions& opts = {});

struct RoadDivision {
  RelativePosition division_id = RelativePosition::ahead;
  std::vector<std::string> lanes;
  // Same-road divisions: meters from the ego start along its lane (negative
  // behind). Vertical and opposite divisions: meters upstream of the junction.
  double from = 0.0;
  double to = 0.0;

  bool empty() const { return to <= from; }
};

/// Divisions around the ego start. Side divisions exist where the ego lane
/// has a neighbour; vertical and opposite ones only on junction approaches.
std::vector<RoadDivision> divide_road(const RoadMap& map, const RoadSelection& road, const scenlang::LanePosition& ego_start,
                                      const SynthOptions& opts = {});

/// Per-participant knobs moved by the repair loop.
struct Placement {
  int slot = 0;             // index among participants sharing the division
  double offset_shift = 0.0;
  double speed_scale = 1.0;
};

/// Waypoints realising `behaviors` in order from `division`. Throws a
/// precondition error when no template fits the road.
scenlang::TrajectoryDef gen_participant_trajectory(const RoadMap& map, const RoadDivision& division,
                                                   const scenlang::LanePosition& ego_start,
                                                   const ActionSequence& behaviors, ParticipantType type,
                                                   double base_speed, const std::string& name,
                                                   const Placement& placement = {}, const SynthOptions& opts = {});

/// Appends the default assertion triple unless assertions are present.
scenlang::ConcreteScenario attach_assertions(scenlang::ConcreteScenario s, const scenlang::AssertionDefaults& d = {});

/// Thrown when every repair round still left diagnostics.
class GenerationFailed : public Error {
 public:
  GenerationFailed(const std::string& what, std::vector<std::string> diagnostics)
      : Error(ErrorKind::domain, what), diagnostics_(std::move(diagnostics)) {}
  const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

struct Generation {
  scenlang::ConcreteScenario scenario;
  int repairs = 0;                // rounds used after the first attempt
  std::vector<std::string> log;   // diagnostics of failed rounds
};

/// Template engine with inspection and repair.
Generation generate_concrete(const abstraction::AbstractScenario& a, const RoadMap& map, std::uint64_t seed,
                             const SynthOptions& opts = {});

/// The staged prompts for a remote generator, in order: instruction,
/// context, road, ego task, divisions, trajectories, assertions.
struct CotPrompts {
  std::vector<std::string> stages;
  std::string joined() const;
};

CotPrompts build_cot_prompts(const abstraction::AbstractScenario& a, const RoadMap& map, const SynthOptions& opts = {});

/// Remote path: sends the prompts, parses the returned program and
/// re-prompts with inspection diagnostics until it passes.
Generation generate_concrete_remote(const abstraction::AbstractScenario& a, const RoadMap& map,
                                    abstraction::Provider& provider, const SynthOptions& opts = {});

}  // namespace scenforge::synth
