// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "scenforge/common.hpp"
#include "scenforge/flowkey.hpp"

namespace scenforge::abstraction {

enum class Role : std::uint8_t { ego, npc, pedestrian };
std::string_view to_string(Role r);

enum class Signal : std::uint8_t { none, light_green, light_red, stop_sign };
std::string_view to_string(Signal s);
std::optional<Signal> signal_from_string(std::string_view s);

struct ParticipantSpec {
  Role role = Role::npc;
  std::optional<ParticipantType> vehicle_type;  // empty for pedestrians
  ActionSequence behaviors;
  std::optional<RelativePosition> relative_position;  // empty for the ego
  std::optional<double> speed;  // optional cruise-speed hint in m/s

  bool operator==(const ParticipantSpec&) const = default;
};

struct AbstractScenario {
  std::string id;
  RoadType road_type = RoadType::straight;
  Signal traffic_signal = Signal::none;
  std::vector<ParticipantSpec> participants;
  std::vector<std::string> notes;  // normalisation assumptions, unparsed lines

  bool operator==(const AbstractScenario&) const = default;

  const ParticipantSpec& ego() const;
  std::vector<const ParticipantSpec*> with_role(Role r) const;
};

/// Throws precondition errors on schema violations (ego count, empty
/// behaviors, role/action compatibility, missing positions).
void validate(const AbstractScenario& a);

nlohmann::json to_json(const AbstractScenario& a);
AbstractScenario abstract_from_json(const nlohmann::json& j);
AbstractScenario load_abstract(const std::string& path);

// Annotated trajectory log: ground truth for the mock provider.
struct AnnotatedWaypoint {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
};

struct AnnotatedParticipant {
  Role role = Role::npc;
  std::optional<ParticipantType> type;
  std::vector<std::string> behaviors;  // raw tokens, e.g. "change_lane"
  std::optional<RelativePosition> position;
  std::optional<double> speed;
  std::vector<AnnotatedWaypoint> waypoints;
};

struct AnnotationLog {
  std::string id;
  RoadType road = RoadType::straight;
  Signal signal = Signal::none;
  std::vector<AnnotatedParticipant> participants;
};

AnnotationLog annotation_from_json(const nlohmann::json& j);
AnnotationLog load_annotation(const std::string& path);

std::string build_understanding_prompt(int frame_count);

enum class Source : std::uint8_t { mock, remote };

struct SceneDescription {
  std::string raw_text;
  Source source = Source::mock;
  int attempts = 1;
};

struct SceneInput {
  std::optional<AnnotationLog> log;
  std::vector<flowkey::GrayFrame> key_frames;
};

class Provider {
 public:
  virtual ~Provider() = default;
  virtual SceneDescription describe(const std::string& prompt, const SceneInput& input) = 0;
};

/// Deterministic: renders the annotation log in the constrained grammar.
class MockProvider : public Provider {
 public:
  SceneDescription describe(const std::string& prompt, const SceneInput& input) override;
};

struct RemoteConfig {
  std::string url;
  std::string api_key;
  int retries = 3;
  double timeout_seconds = 30.0;

  /// Reads SCENFORGE_LLM_URL / SCENFORGE_LLM_KEY; usage error when the URL is unset.
  static RemoteConfig from_env();
};

/// Failure talking to a remote provider after all retries.
class ProviderError : public Error {
 public:
  ProviderError(const std::string& what, int attempts) : Error(ErrorKind::io, what), attempts_(attempts) {}
  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

/// POSTs {prompt, images[] (base64 PGM), text} and reads {"text": ...}.
class RemoteProvider : public Provider {
 public:
  explicit RemoteProvider(RemoteConfig config) : config_(std::move(config)) {}
  SceneDescription describe(const std::string& prompt, const SceneInput& input) override;

 private:
  RemoteConfig config_;
};

/// Output-format instruction appended to prompts sent to providers.
std::string format_instruction();

/// Mock descriptions never fail; remote descriptions are returned as received.
SceneDescription describe_scene(Provider& provider, const SceneInput& input);

AbstractScenario parse_description(const SceneDescription& desc);

/// describe_scene + parse_description, re-prompting with the parse error up to
/// `max_reprompts` times.
AbstractScenario understand_scene(Provider& provider, const SceneInput& input, int max_reprompts = 2);

/// Behaviour tokens of the log normalised the same way the parser does.
ActionSequence normalized_behaviors(const AnnotatedParticipant& p);

}  // namespace scenforge::abstraction
