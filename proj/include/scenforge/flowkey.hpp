// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace scenforge::flowkey {

struct RgbFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> r, g, b;
  double timestamp = 0.0;
};

struct GrayFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major
  double timestamp = 0.0;

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Rec.601 luma, rounded to nearest.
GrayFrame to_grayscale(const RgbFrame& frame);

// Binary PGM (P5) / PPM (P6) I/O. PPM input is converted to gray on read.
GrayFrame read_pnm(const std::string& path);
void write_pgm(const std::string& path, const GrayFrame& frame);
std::vector<std::uint8_t> encode_pgm(const GrayFrame& frame);

struct FlowPoint {
  double x = 0.0;
  double y = 0.0;
};

struct FlowVector {
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  bool tracked = false;
};

struct LucasKanadeOptions {
  int window = 5;               // W x W integration window
  int iterations = 20;          // Gauss-Newton refinement steps
  double min_eigenvalue = 1e-2; // structure tensor conditioning gate
  double epsilon = 1e-3;        // convergence threshold in px
};

/// Sparse iterative Lucas-Kanade flow from `prev` to `next` (no pyramid).
std::vector<FlowVector> lucas_kanade_flow(const GrayFrame& prev, const GrayFrame& next,
                                          std::span<const FlowPoint> points,
                                          const LucasKanadeOptions& opts = {});

struct StateRow {
  int object_id = 0;
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;

  bool operator==(const StateRow&) const = default;
};

struct MotionStateVector {
  int frame_index = 0;
  std::vector<StateRow> rows;

  bool operator==(const MotionStateVector&) const = default;
};

/// Per-object observed positions; `positions[k]` is the position at frame
/// `first_frame + k`. NaN coordinates mark an unobserved frame.
struct ObjectTrack {
  int object_id = 0;
  int first_frame = 0;
  std::vector<std::pair<double, double>> positions;
};

/// One MotionStateVector per frame in [0, frame_count). Velocities are
/// backward per-frame displacements; the first observed frame of a track
/// copies the first displacement.
std::vector<MotionStateVector> build_motion_states(std::span<const ObjectTrack> tracks,
                                                   int frame_count);

MotionStateVector interpolate_state(const MotionStateVector& prev, const MotionStateVector& next,
                                    double alpha);

struct DeviationOptions {
  double velocity_weight = 1.0;
  double unmatched_penalty = 1.0;  // per object id present in only one vector
};

double motion_deviation(const MotionStateVector& actual, const MotionStateVector& interpolated,
                        const DeviationOptions& opts = {});

struct KeyFrameOptions {
  double alpha = 0.5;
  std::optional<double> tau;  // default: max(0.5, 3 * median |dM|)
  double velocity_weight = 1.0;
};

struct KeyFrameSequence {
  std::vector<int> indices;
  std::vector<double> deviations;
  double tau = 0.0;
};

KeyFrameSequence extract_key_frames(std::span<const MotionStateVector> states,
                                    const KeyFrameOptions& opts = {});

struct ObjectDetectionOptions {
  LucasKanadeOptions lk;
  double motion_threshold = 0.25;  // px/frame
  int min_pixels = 6;
  double max_displacement = 2.0;   // px/frame; association gate is twice this
};

/// Dense flow between two frames, pixel clustering into moving objects, and
/// nearest-neighbour association into tracks.
std::vector<ObjectTrack> track_objects(std::span<const GrayFrame> frames,
                                       const ObjectDetectionOptions& opts = {});

// Flow-field file: the motion state sequence as JSON.
nlohmann::json states_to_json(std::span<const MotionStateVector> states);
std::vector<MotionStateVector> states_from_json(const nlohmann::json& j);
nlohmann::json key_frames_to_json(const KeyFrameSequence& k);

/// Sorted frame files (.pgm/.ppm) in a directory, read as gray frames.
std::vector<GrayFrame> load_frame_directory(const std::string& dir, double frame_interval = 0.1);

}  // namespace scenforge::flowkey
