// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

// Renders the bundled fixture videos: frames/*.pgm plus the exact motion
// states as flow.json. Build against the core library and run from the
// repository root:
//   g++ -std=c++20 -Iinclude -Ivendor scripts/gen_fixture_videos.cpp build/src/libscenforge_core.a -lssl -lcrypto
//   ./a.out data/fixtures/videos

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>

#include "../tests/support/synthetic.hpp"

using namespace scenforge;
namespace fs = std::filesystem;

namespace {

using Path = std::function<std::pair<double, double>(int)>;

void write_video(const fs::path& dir, int frames, const std::vector<Path>& objects) {
  fs::create_directories(dir / "frames");
  std::vector<std::vector<std::pair<double, double>>> paths(objects.size());
  for (int f = 0; f < frames; ++f) {
    std::vector<testing::TexturedBlob> blobs;
    for (std::size_t i = 0; i < objects.size(); ++i) {
      const auto [x, y] = objects[i](f);
      paths[i].emplace_back(x, y);
      blobs.push_back({x, y, 5.0, 0.9 * static_cast<double>(i) + 0.4});
    }
    char name[32];
    std::snprintf(name, sizeof name, "%03d.pgm", f);
    flowkey::write_pgm((dir / "frames" / name).string(), testing::render(96, 64, blobs));
  }
  std::ofstream(dir / "flow.json") << flowkey::states_to_json(testing::states_from_paths(paths)).dump(1) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path root = argc > 1 ? argv[1] : "data/fixtures/videos";
  // A lead that brakes to a crawl ahead of a steadily moving ego.
  write_video(root / "v01_slow_lead", 16,
              {[](int f) { return std::pair{18.0 + 1.2 * f, 44.0}; },
               [](int f) { return std::pair{52.0 + (f < 6 ? 1.5 * f : 9.0 + 0.5 * (f - 6)), 20.0}; }});
  // A truck crossing while a pedestrian waits, then walks.
  write_video(root / "v02_table1_intersection", 16,
              {[](int f) { return std::pair{14.0 + 1.5 * f, 18.0}; },
               [](int f) { return std::pair{74.0, 50.0 - (f < 8 ? 0.0 : 1.0 * (f - 8))}; }});
  // A vehicle that turns: heading changes mid clip.
  write_video(root / "v03_tjunction_turn", 16,
              {[](int f) { return f < 8 ? std::pair{20.0 + 1.5 * f, 40.0} : std::pair{32.0, 40.0 - 1.5 * (f - 8)}; }});
  std::cout << "wrote " << root << "\n";
}
