// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "scenforge/search.hpp"

namespace scenforge::pipeline {

inline constexpr const char* kToolVersion = "0.1.0";

/// One recorded clip: frames or a flow-field file, plus its annotation log.
struct VideoInput {
  std::string id;
  std::string frames;       // directory of .pgm/.ppm files
  std::string flow;         // flow-field JSON; used when frames is empty
  std::string annotations;  // annotation log JSON
  double frame_interval = 0.1;
};

enum class ProviderMode : std::uint8_t { mock, remote };

struct RunConfig {
  std::string map;
  std::vector<VideoInput> videos;
  ProviderMode provider = ProviderMode::mock;
  std::vector<std::string> policies{"lanekeeper-staticbug", "lanekeeper"};
  std::optional<std::uint64_t> seed;
  std::string out;
  double alpha = 0.5;
  search::SearchConfig search;

  /// Canonical JSON without the output directory; hashed into the manifest.
  nlohmann::json to_json() const;
};

/// Reads a TOML run config. Relative paths resolve against the file's
/// directory. Throws usage errors for bad values and io errors for missing inputs.
RunConfig load_run_config(const std::string& path);

/// Applies a TOML table of search settings ([search], [sim], [policy], cost_model).
void apply_search_toml(search::SearchConfig& c, const std::string& toml_text, const std::string& base_dir = ".");
search::SearchConfig load_search_config(const std::string& path);

/// Lowercase hex SHA-256.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

struct ArtifactEntry {
  std::string stage;
  std::string path;  // relative to the output directory
  std::string sha256;
};

struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string config_hash;
  std::vector<ArtifactEntry> artifacts;     // sorted by path
  std::map<std::string, double> timings;    // seconds per stage; not hashed

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
  /// Empty manifest when the file is absent.
  static RunManifest load(const std::string& path);
  /// Temporary file plus rename.
  void save(const std::string& path) const;
};

/// Stage commands. Each reads the previous stage's artifacts under cfg.out,
/// writes its own and updates manifest.json. Missing prior artifacts are
/// usage errors.
void cmd_extract(const RunConfig& cfg);
void cmd_abstract(const RunConfig& cfg);
void cmd_synth(const RunConfig& cfg);
/// Domain error when a scenario fails inspection.
void cmd_inspect(const RunConfig& cfg);
void cmd_search(const RunConfig& cfg);
void cmd_report(const RunConfig& cfg);
/// extract, abstract, synth, inspect, search, report.
void run_all(const RunConfig& cfg);

/// Key frames for a frame directory or a flow-field JSON file.
nlohmann::json extract_key_frames_from(const std::string& input, double alpha = 0.5, double frame_interval = 0.1);

/// Re-runs a replay and returns {"termination", "verdicts": [...]}; writes the
/// JSON Lines trace when `trace_path` is non-empty.
nlohmann::json replay(const sim::Replay& r, const RoadMap& map, const std::string& trace_path = "");

/// JSON form of a feasibility report, optionally with semantic equivalence.
nlohmann::json inspect_report(const scenlang::ConcreteScenario& s, const RoadMap& map,
                              const abstraction::AbstractScenario* a = nullptr);

/// Per-policy CSV text and the markdown summary from search directories
/// laid out as <root>/<video>/search/<policy>/.
struct Report {
  std::map<std::string, std::string> csv_by_policy;
  std::string markdown;
};
Report build_report(const std::string& out_dir, const std::vector<std::string>& videos,
                    const std::vector<std::string>& policies);

}  // namespace scenforge::pipeline
