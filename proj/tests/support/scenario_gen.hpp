// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Random scenario ASTs for round-trip and fuzz testing.

#include <random>
#include <string>

#include "scenforge/scenlang.hpp"

namespace scenforge::testing {

class ScenarioGenerator {
 public:
  explicit ScenarioGenerator(std::uint64_t seed) : rng_(seed) {}

  scenlang::ConcreteScenario next() {
    using namespace scenlang;
    ConcreteScenario s;
    s.map_id = text();
    s.ego.type = coin() ? ParticipantType::car : ParticipantType::truck;
    s.ego.start = lane_position();
    do {
      s.ego.destination = lane_position();
    } while (s.ego.destination == s.ego.start);
    int counter = 0;
    const int npcs = uniform(0, 3), peds = uniform(0, 2);
    for (int i = 0; i < npcs; ++i) s.npcs.push_back(trajectory(false, counter++));
    for (int i = 0; i < peds; ++i) s.pedestrians.push_back(trajectory(true, counter++));
    const int kinds = uniform(0, 4);
    for (int i = 0; i < kinds; ++i) {
      switch (uniform(0, 2)) {
        case 0: s.assertions.push_back(Assertion::never_collision()); break;
        case 1: s.assertions.push_back(Assertion::always_clearance(positive())); break;
        default: s.assertions.push_back(Assertion::eventually_at_destination(positive(), positive())); break;
      }
    }
    return s;
  }

 private:
  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return uniform(0, 1) == 1; }

  double real() {
    switch (uniform(0, 3)) {
      case 0: return uniform(-500, 500);
      case 1: return std::uniform_real_distribution<double>(-1e3, 1e3)(rng_);
      case 2: return std::ldexp(std::uniform_real_distribution<double>(-1.0, 1.0)(rng_), uniform(-60, 60));
      default: return uniform(-20, 20) * 0.1;
    }
  }
  double non_negative() { return std::abs(real()); }
  double positive() {
    double v = 0.0;
    while (!(v > 0.0)) v = non_negative();
    return v;
  }

  std::string text() {
    static const std::string pieces[] = {"lane_", "a", "Z", "_", "7", "\"", "\\", " ", "\xC3\xA9",
                                         "\xE2\x86\x92", "\x01", "\x7F", "\xFF", "#", "->", "\n"};
    std::string s;
    const int n = uniform(0, 6);
    for (int i = 0; i < n; ++i) s += pieces[uniform(0, 15)];
    return s;
  }

  std::string name(int index) {
    // Unique by construction: a random stem plus the participant index.
    return text() + "#" + std::to_string(index) + (coin() ? "" : "\xC3\xA9");
  }

  scenlang::LanePosition lane_position() { return {text(), non_negative()}; }

  scenlang::TrajectoryDef trajectory(bool pedestrian, int index) {
    using namespace scenlang;
    TrajectoryDef d;
    d.type = pedestrian ? ParticipantType::pedestrian : (coin() ? ParticipantType::car : ParticipantType::truck);
    d.name = coin() ? "p" + std::to_string(index) : name(index);
    if (coin()) d.size = Footprint{positive(), positive()};
    const int n = uniform(2, 5);
    for (int i = 0; i < n; ++i) {
      Waypoint w;
      if (coin()) {
        w.position = lane_position();
        if (coin()) w.lateral = real();
      } else {
        w.position = Vec2{real(), real()};
      }
      w.speed = non_negative();
      if (coin()) w.time = i + 0.25 * uniform(0, 3);
      d.waypoints.push_back(w);
    }
    return d;
  }

  std::mt19937_64 rng_;
};

}  // namespace scenforge::testing
