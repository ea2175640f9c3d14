// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Synthetic frame and motion-state generators shared by the unit and
// acceptance suites.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "scenforge/flowkey.hpp"

namespace scenforge::testing {

inline double smooth_step_envelope(double u, double half, double ramp) {
  const double a = std::abs(u);
  if (a <= half) return 1.0;
  if (a >= half + ramp) return 0.0;
  const double t = (a - half) / ramp;
  const double c = std::cos(0.5 * std::numbers::pi * t);
  return c * c;
}

struct TexturedBlob {
  double cx = 0.0;
  double cy = 0.0;
  double half = 5.0;
  double phase = 0.0;
};

/// Renders smooth textured blobs over a flat background. Sampling a
/// continuous function keeps sub-pixel motion exact.
inline flowkey::GrayFrame render(int width, int height, const std::vector<TexturedBlob>& blobs,
                                 double background = 30.0) {
  flowkey::GrayFrame f{width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height), 0.0};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double v = background;
      for (const auto& b : blobs) {
        const double u = x - b.cx, w = y - b.cy;
        const double env = smooth_step_envelope(u, b.half, 4.0) * smooth_step_envelope(w, b.half, 4.0);
        if (env <= 0.0) continue;
        const double tex = 130.0 + 55.0 * std::sin(0.45 * u + 0.3 * w + b.phase) +
                           45.0 * std::cos(0.35 * u - 0.5 * w + 2.0 * b.phase);
        v = (1.0 - env) * v + env * tex;
      }
      f.pixels[static_cast<std::size_t>(y) * width + x] =
          static_cast<std::uint8_t>(std::lround(std::fmin(255.0, std::fmax(0.0, v))));
    }
  }
  return f;
}

/// Bright square of side `side` blurred by a Gaussian of `sigma`, centred at (cx, cy).
inline flowkey::GrayFrame blurred_square(int width, int height, double cx, double cy, double side,
                                         double sigma) {
  flowkey::GrayFrame f{width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height), 0.0};
  auto edge = [&](double d) { return 0.5 * std::erfc(d / (std::sqrt(2.0) * sigma)); };
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double ix = edge(-(x - cx) - side / 2) - edge(-(x - cx) + side / 2);
      const double iy = edge(-(y - cy) - side / 2) - edge(-(y - cy) + side / 2);
      const double v = 20.0 + 200.0 * std::abs(ix) * std::abs(iy);
      f.pixels[static_cast<std::size_t>(y) * width + x] = static_cast<std::uint8_t>(std::lround(v));
    }
  }
  return f;
}

/// Exact motion states for per-object positions (frame-major).
inline std::vector<flowkey::MotionStateVector> states_from_paths(
    const std::vector<std::vector<std::pair<double, double>>>& paths) {
  std::vector<flowkey::ObjectTrack> tracks;
  int frames = 0;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    tracks.push_back({static_cast<int>(i), 0, paths[i]});
    frames = std::max(frames, static_cast<int>(paths[i].size()));
  }
  return flowkey::build_motion_states(tracks, frames);
}

}  // namespace scenforge::testing
