// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>

#include "scenforge/pipeline.hpp"

using namespace scenforge;
using namespace scenforge::pipeline;
namespace fs = std::filesystem;

namespace {

const std::string kData = SCENFORGE_DATA_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("scenforge_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// Two bundled videos with small budgets, written next to the output directory.
std::string small_config(const fs::path& dir, const std::string& extra = "seed = 3\n") {
  const std::string videos = kData + "/fixtures/videos/";
  std::ofstream(dir / "run.toml") << "map = \"" << kData << "/maps/fixture_map.json\"\n"
                                  << "out = \"out\"\n"
                                  << extra << "policies = [\"lanekeeper-staticbug\"]\n"
                                  << "[[videos]]\nid = \"v01\"\nflow = \"" << videos << "v01_slow_lead/flow.json\"\n"
                                  << "annotations = \"" << videos << "v01_slow_lead/annotation.json\"\n"
                                  << "[[videos]]\nid = \"v03\"\nframes = \"" << videos << "v03_tjunction_turn/frames\"\n"
                                  << "annotations = \"" << videos << "v03_tjunction_turn/annotation.json\"\n"
                                  << "[search]\nouter_budget = 6\ninner_budget = 2\nthreads = 1\n";
  return (dir / "run.toml").string();
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::domain;
}

}  // namespace

TEST_CASE("sha256") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("run config loading") {
  TempDir t("config");
  const auto cfg = load_run_config(small_config(t.path));
  CHECK(cfg.seed == 3u);
  CHECK(cfg.search.seed == 3u);
  CHECK(cfg.search.outer_budget == 6);
  CHECK(cfg.videos.size() == 2);
  CHECK(cfg.out == (t.path / "out").lexically_normal().string());
  CHECK(cfg.policies == std::vector<std::string>{"lanekeeper-staticbug"});
  CHECK_FALSE(cfg.to_json().contains("out"));

  auto bad = [&](const std::string& text) {
    std::ofstream(t.path / "bad.toml") << text;
    return kind_of([&] { load_run_config((t.path / "bad.toml").string()); });
  };
  const std::string map = "map = \"" + kData + "/maps/fixture_map.json\"\n";
  CHECK(bad("seed = 1\n") == ErrorKind::usage);
  CHECK(bad("map = \"nowhere.json\"\n") == ErrorKind::io);
  CHECK(bad(map + "provider = \"oracle\"\n") == ErrorKind::usage);
  CHECK(bad(map + "policies = [\"autopilot\"]\n") == ErrorKind::usage);
  CHECK(bad(map + "seed = -4\n") == ErrorKind::usage);
  CHECK(bad(map + "seed = = 4\n") == ErrorKind::usage);
  CHECK(bad(map + "[[videos]]\nid = \"x\"\nannotations = \"a.json\"\n") == ErrorKind::usage);
  CHECK(bad(map + "[search]\nouter_budget = 0\n") == ErrorKind::usage);
  CHECK(bad(map + "[search]\nsigma_pos = \"wide\"\n") == ErrorKind::usage);
}

TEST_CASE("search config toml") {
  search::SearchConfig c;
  apply_search_toml(c, "[search]\nM = 20.0\npopulation = 3\n[sim]\nhorizon = 30.0\n[policy]\ncruise_speed = 9.0\n");
  CHECK(c.M == 20.0);
  CHECK(c.population == 3);
  CHECK(c.sim.horizon == 30.0);
  CHECK(c.policy.cruise_speed == 9.0);
  CHECK(c.outer_budget == 200);
  CHECK_THROWS_AS(apply_search_toml(c, "[search]\nresamples = -1\n"), Error);
}

TEST_CASE("manifest json") {
  RunManifest m;
  m.config_hash = "abc";
  m.artifacts = {{"extract", "v/key_frames.json", "00"}};
  m.timings["extract"] = 0.5;
  const auto r = RunManifest::from_json(m.to_json());
  CHECK(r.config_hash == "abc");
  CHECK(r.artifacts.size() == 1);
  CHECK(r.artifacts[0].path == "v/key_frames.json");
  CHECK(r.timings.at("extract") == 0.5);
  CHECK(RunManifest::load("/nonexistent/manifest.json").artifacts.empty());
  CHECK_THROWS_AS(RunManifest::from_json(nlohmann::json::object()), Error);
}

TEST_CASE("stages refuse to run out of order") {
  TempDir t("order");
  const auto cfg = load_run_config(small_config(t.path));
  CHECK(kind_of([&] { cmd_synth(cfg); }) == ErrorKind::usage);
  CHECK(kind_of([&] { cmd_abstract(cfg); }) == ErrorKind::usage);
  CHECK(kind_of([&] { cmd_report(cfg); }) == ErrorKind::usage);
  cmd_extract(cfg);
  CHECK(kind_of([&] { cmd_inspect(cfg); }) == ErrorKind::usage);

  TempDir u("noseed");
  const auto unseeded = load_run_config(small_config(u.path, ""));
  cmd_extract(unseeded);
  cmd_abstract(unseeded);
  CHECK(kind_of([&] { cmd_synth(unseeded); }) == ErrorKind::usage);
}

TEST_CASE("full run: artifacts, manifest and report") {
  TempDir t("full");
  auto cfg = load_run_config(small_config(t.path));
  run_all(cfg);
  const fs::path out = cfg.out;
  for (const char* f : {"v01/key_frames.json", "v01/abstract.json", "v01/scenario.scn", "v01/inspect.json",
                        "v01/search/lanekeeper-staticbug/violations.jsonl", "v03/motion_states.json",
                        "report/lanekeeper-staticbug.csv", "report/summary.md", "run_config.json"})
    CHECK_MESSAGE(fs::exists(out / f), f);

  const auto m = RunManifest::load((out / "manifest.json").string());
  CHECK(m.tool_version == kToolVersion);
  CHECK(m.config_hash == sha256_hex(slurp(out / "run_config.json")));
  CHECK(std::is_sorted(m.artifacts.begin(), m.artifacts.end(),
                       [](const auto& a, const auto& b) { return a.path < b.path; }));
  for (const auto& a : m.artifacts) CHECK(a.sha256 == sha256_file((out / a.path).string()));
  for (const char* s : {"extract", "abstract", "synth", "inspect", "search", "report"}) CHECK(m.timings.count(s));

  const auto csv = slurp(out / "report/lanekeeper-staticbug.csv");
  CHECK(csv.rfind("video,abstract_id,evaluations,svs,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.find("\nv01,v01,6,") != std::string::npos);

  SUBCASE("re-running a stage keeps the other stages' entries") {
    const auto before = m.artifacts.size();
    cmd_extract(cfg);
    const auto again = RunManifest::load((out / "manifest.json").string());
    CHECK(again.artifacts.size() == before);
    CHECK(again.to_json()["artifacts"] == m.to_json()["artifacts"]);
  }
  SUBCASE("a new configuration starts a new manifest") {
    cfg.seed = 4;
    cmd_extract(cfg);
    const auto fresh = RunManifest::load((out / "manifest.json").string());
    CHECK(fresh.config_hash != m.config_hash);
    for (const auto& a : fresh.artifacts) CHECK((a.stage == "extract" || a.stage == "config"));
  }
}

TEST_CASE("frames and flow fields agree on key frames") {
  for (const char* v : {"v02_table1_intersection", "v03_tjunction_turn"}) {
    CAPTURE(v);
    const std::string dir = kData + "/fixtures/videos/" + v;
    const auto from_frames = extract_key_frames_from(dir + "/frames");
    const auto from_flow = extract_key_frames_from(dir + "/flow.json");
    CHECK(from_frames["indices"] == from_flow["indices"]);
    CHECK(from_frames["frame_count"] == from_flow["frame_count"]);
  }
  CHECK_THROWS_AS(extract_key_frames_from(kData + "/nothing.json"), Error);
}
