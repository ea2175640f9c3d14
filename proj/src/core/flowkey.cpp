// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "scenforge/flowkey.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "scenforge/common.hpp"

namespace scenforge::flowkey {

using nlohmann::json;

GrayFrame to_grayscale(const RgbFrame& frame) {
  const std::size_t n = static_cast<std::size_t>(frame.width) * static_cast<std::size_t>(frame.height);
  if (frame.width < 0 || frame.height < 0 || frame.r.size() != n || frame.g.size() != n ||
      frame.b.size() != n) {
    fail(ErrorKind::precondition, "RGB channel sizes do not match frame dimensions");
  }
  GrayFrame out{frame.width, frame.height, std::vector<std::uint8_t>(n), frame.timestamp};
  for (std::size_t i = 0; i < n; ++i) {
    const double y = 0.299 * frame.r[i] + 0.587 * frame.g[i] + 0.114 * frame.b[i];
    out.pixels[i] = static_cast<std::uint8_t>(std::clamp<long>(std::lround(y), 0, 255));
  }
  return out;
}

namespace {

// Reads the next whitespace-separated header token, skipping '#' comments.
std::string pnm_token(std::istream& in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(c);
  }
  return tok;
}

}  // namespace

GrayFrame read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open frame '" + path + "'");
  const std::string magic = pnm_token(in);
  if (magic != "P5" && magic != "P6") fail(ErrorKind::parse, "'" + path + "' is not a binary PGM/PPM");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(pnm_token(in));
    h = std::stoi(pnm_token(in));
    maxval = std::stoi(pnm_token(in));
  } catch (const std::exception&) {
    fail(ErrorKind::parse, "'" + path + "': bad PNM header");
  }
  if (w <= 0 || h <= 0 || maxval != 255) fail(ErrorKind::parse, "'" + path + "': unsupported PNM header");
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  const std::size_t channels = magic == "P6" ? 3 : 1;
  std::vector<std::uint8_t> raw(n * channels);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) fail(ErrorKind::parse, "'" + path + "': truncated pixel data");
  if (channels == 1) return GrayFrame{w, h, std::move(raw), 0.0};
  RgbFrame rgb{w, h, {}, {}, {}, 0.0};
  rgb.r.resize(n);
  rgb.g.resize(n);
  rgb.b.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    rgb.r[i] = raw[3 * i];
    rgb.g[i] = raw[3 * i + 1];
    rgb.b[i] = raw[3 * i + 2];
  }
  return to_grayscale(rgb);
}

std::vector<std::uint8_t> encode_pgm(const GrayFrame& frame) {
  const std::string header = "P5\n" + std::to_string(frame.width) + " " + std::to_string(frame.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), frame.pixels.begin(), frame.pixels.end());
  return out;
}

void write_pgm(const std::string& path, const GrayFrame& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write '" + path + "'");
  const auto bytes = encode_pgm(frame);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

namespace {

double sample(const GrayFrame& f, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(f.width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(f.height - 1));
  const int x0 = std::min(static_cast<int>(x), f.width - 1);
  const int y0 = std::min(static_cast<int>(y), f.height - 1);
  const int x1 = std::min(x0 + 1, f.width - 1);
  const int y1 = std::min(y0 + 1, f.height - 1);
  const double ax = x - x0, ay = y - y0;
  const double top = (1 - ax) * f.at(x0, y0) + ax * f.at(x1, y0);
  const double bot = (1 - ax) * f.at(x0, y1) + ax * f.at(x1, y1);
  return (1 - ay) * top + ay * bot;
}

FlowVector track_point(const GrayFrame& prev, const GrayFrame& next, FlowPoint p,
                       const LucasKanadeOptions& opts) {
  FlowVector out{p.x, p.y, 0.0, 0.0, false};
  const int h = opts.window / 2;
  if (p.x < h || p.y < h || p.x > prev.width - 1 - h || p.y > prev.height - 1 - h) return out;

  const int n = opts.window * opts.window;
  std::vector<double> ix(n), iy(n), i0(n);
  double gxx = 0, gxy = 0, gyy = 0;
  int k = 0;
  for (int dy = -h; dy <= h; ++dy) {
    for (int dx = -h; dx <= h; ++dx, ++k) {
      const double x = p.x + dx, y = p.y + dy;
      ix[k] = 0.5 * (sample(prev, x + 1, y) - sample(prev, x - 1, y));
      iy[k] = 0.5 * (sample(prev, x, y + 1) - sample(prev, x, y - 1));
      i0[k] = sample(prev, x, y);
      gxx += ix[k] * ix[k];
      gxy += ix[k] * iy[k];
      gyy += iy[k] * iy[k];
    }
  }
  // Smaller eigenvalue of the normalised structure tensor.
  const double a = gxx / n, b = gxy / n, c = gyy / n;
  const double lmin = 0.5 * (a + c - std::sqrt((a - c) * (a - c) + 4 * b * b));
  if (lmin < opts.min_eigenvalue) return out;
  const double det = gxx * gyy - gxy * gxy;

  double dx = 0.0, dy = 0.0;
  for (int it = 0; it < opts.iterations; ++it) {
    double bx = 0.0, by = 0.0;
    k = 0;
    for (int wy = -h; wy <= h; ++wy) {
      for (int wx = -h; wx <= h; ++wx, ++k) {
        const double diff = i0[k] - sample(next, p.x + wx + dx, p.y + wy + dy);
        bx += ix[k] * diff;
        by += iy[k] * diff;
      }
    }
    const double ux = (gyy * bx - gxy * by) / det;
    const double uy = (gxx * by - gxy * bx) / det;
    dx += ux;
    dy += uy;
    if (std::hypot(ux, uy) < opts.epsilon) break;
  }
  if (!std::isfinite(dx) || !std::isfinite(dy)) return out;
  out.vx = dx;
  out.vy = dy;
  out.tracked = true;
  return out;
}

}  // namespace

std::vector<FlowVector> lucas_kanade_flow(const GrayFrame& prev, const GrayFrame& next,
                                          std::span<const FlowPoint> points,
                                          const LucasKanadeOptions& opts) {
  if (prev.width != next.width || prev.height != next.height) {
    fail(ErrorKind::precondition, "frame size mismatch in lucas_kanade_flow");
  }
  if (points.empty()) fail(ErrorKind::precondition, "lucas_kanade_flow needs at least one point");
  require(opts.window >= 3 && opts.window % 2 == 1, "LK window must be odd and >= 3");
  std::vector<FlowVector> out;
  out.reserve(points.size());
  for (const FlowPoint& p : points) out.push_back(track_point(prev, next, p, opts));
  return out;
}

std::vector<MotionStateVector> build_motion_states(std::span<const ObjectTrack> tracks, int frame_count) {
  require(frame_count >= 0, "frame_count must be non-negative");
  std::vector<MotionStateVector> out(static_cast<std::size_t>(frame_count));
  for (int f = 0; f < frame_count; ++f) out[f].frame_index = f;
  std::map<int, bool> seen;
  for (const ObjectTrack& t : tracks) {
    if (!seen.emplace(t.object_id, true).second) {
      fail(ErrorKind::precondition, "duplicate object id " + std::to_string(t.object_id));
    }
    if (t.positions.empty()) continue;
    if (t.first_frame < 0 || t.first_frame + static_cast<int>(t.positions.size()) > frame_count) {
      fail(ErrorKind::precondition, "track " + std::to_string(t.object_id) + " exceeds the frame range");
    }
    // NaN marks a frame where the object was not observed. A single missing
    // frame is bridged linearly; longer gaps mean the object was retired.
    auto p = t.positions;
    auto missing = [&](std::size_t k) { return std::isnan(p[k].first) || std::isnan(p[k].second); };
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (!missing(k)) continue;
      if (k == 0 || k + 1 >= p.size() || missing(k + 1)) {
        fail(ErrorKind::domain, "track " + std::to_string(t.object_id) +
                                    " has a gap longer than one frame; re-register it under a new id");
      }
      p[k] = {0.5 * (p[k - 1].first + p[k + 1].first), 0.5 * (p[k - 1].second + p[k + 1].second)};
    }
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (!std::isfinite(p[k].first) || !std::isfinite(p[k].second)) {
        fail(ErrorKind::precondition, "non-finite position in track " + std::to_string(t.object_id));
      }
      StateRow row{t.object_id, p[k].first, p[k].second, 0.0, 0.0};
      if (k > 0) {
        row.vx = p[k].first - p[k - 1].first;
        row.vy = p[k].second - p[k - 1].second;
      } else if (p.size() > 1) {
        row.vx = p[1].first - p[0].first;
        row.vy = p[1].second - p[0].second;
      }
      out[static_cast<std::size_t>(t.first_frame) + k].rows.push_back(row);
    }
  }
  for (auto& s : out) {
    std::sort(s.rows.begin(), s.rows.end(),
              [](const StateRow& a, const StateRow& b) { return a.object_id < b.object_id; });
  }
  return out;
}

MotionStateVector interpolate_state(const MotionStateVector& prev, const MotionStateVector& next,
                                    double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorKind::precondition, "alpha must lie in [0, 1]");
  MotionStateVector out;
  out.frame_index = static_cast<int>(std::lround((1.0 - alpha) * prev.frame_index + alpha * next.frame_index));
  for (const StateRow& a : prev.rows) {
    const auto it = std::find_if(next.rows.begin(), next.rows.end(),
                                 [&](const StateRow& r) { return r.object_id == a.object_id; });
    if (it == next.rows.end()) continue;
    const StateRow& b = *it;
    out.rows.push_back({a.object_id, (1 - alpha) * a.x + alpha * b.x, (1 - alpha) * a.y + alpha * b.y,
                        (1 - alpha) * a.vx + alpha * b.vx, (1 - alpha) * a.vy + alpha * b.vy});
  }
  std::sort(out.rows.begin(), out.rows.end(),
            [](const StateRow& a, const StateRow& b) { return a.object_id < b.object_id; });
  return out;
}

double motion_deviation(const MotionStateVector& actual, const MotionStateVector& interpolated,
                        const DeviationOptions& opts) {
  double total = 0.0;
  std::size_t unmatched = 0;
  for (const StateRow& a : actual.rows) {
    const auto it = std::find_if(interpolated.rows.begin(), interpolated.rows.end(),
                                 [&](const StateRow& r) { return r.object_id == a.object_id; });
    if (it == interpolated.rows.end()) {
      ++unmatched;
      continue;
    }
    total += std::hypot(a.x - it->x, a.y - it->y) + opts.velocity_weight * std::hypot(a.vx - it->vx, a.vy - it->vy);
  }
  for (const StateRow& b : interpolated.rows) {
    const bool found = std::any_of(actual.rows.begin(), actual.rows.end(),
                                   [&](const StateRow& r) { return r.object_id == b.object_id; });
    if (!found) ++unmatched;
  }
  if (unmatched > 0) total += opts.unmatched_penalty * static_cast<double>(unmatched);
  return total;
}

KeyFrameSequence extract_key_frames(std::span<const MotionStateVector> states, const KeyFrameOptions& opts) {
  if (states.size() < 3) fail(ErrorKind::precondition, "key-frame extraction needs at least 3 frames");
  const std::size_t n = states.size();
  std::vector<MotionStateVector> predicted(n);
  for (std::size_t f = 1; f + 1 < n; ++f) predicted[f] = interpolate_state(states[f - 1], states[f + 1], opts.alpha);

  double tau = 0.0;
  if (opts.tau) {
    tau = *opts.tau;
  } else {
    // Scale estimate from matched objects only; unmatched penalties depend on tau.
    std::vector<double> dev;
    DeviationOptions matched{opts.velocity_weight, 0.0};
    for (std::size_t f = 1; f + 1 < n; ++f) dev.push_back(std::abs(motion_deviation(states[f], predicted[f], matched)));
    std::sort(dev.begin(), dev.end());
    const std::size_t m = dev.size();
    const double median = m % 2 ? dev[m / 2] : 0.5 * (dev[m / 2 - 1] + dev[m / 2]);
    tau = std::max(0.5, 3.0 * median);
  }

  KeyFrameSequence out;
  out.tau = tau;
  DeviationOptions dopts{opts.velocity_weight, 2.0 * tau};
  out.indices.push_back(states.front().frame_index);
  out.deviations.push_back(0.0);
  for (std::size_t f = 1; f + 1 < n; ++f) {
    const double d = motion_deviation(states[f], predicted[f], dopts);
    if (d > tau) {
      out.indices.push_back(states[f].frame_index);
      out.deviations.push_back(d);
    }
  }
  out.indices.push_back(states.back().frame_index);
  out.deviations.push_back(0.0);
  return out;
}

namespace {

struct Blob {
  double x = 0.0, y = 0.0, vx = 0.0, vy = 0.0;
};

// Moving-pixel components of `from` using flow toward `to`.
std::vector<Blob> moving_blobs(const GrayFrame& from, const GrayFrame& to, const ObjectDetectionOptions& opts) {
  const int w = from.width, h = from.height, half = opts.lk.window / 2;
  std::vector<FlowVector> flow(static_cast<std::size_t>(w) * h);
  std::vector<char> moving(flow.size(), 0);
  for (int y = half; y < h - half; ++y) {
    for (int x = half; x < w - half; ++x) {
      bool changed = false;
      for (int dy = -half; dy <= half && !changed; ++dy) {
        for (int dx = -half; dx <= half; ++dx) {
          if (from.at(x + dx, y + dy) != to.at(x + dx, y + dy)) {
            changed = true;
            break;
          }
        }
      }
      if (!changed) continue;
      const FlowPoint p{static_cast<double>(x), static_cast<double>(y)};
      const FlowVector v = track_point(from, to, p, opts.lk);
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      flow[i] = v;
      moving[i] = v.tracked && std::hypot(v.vx, v.vy) > opts.motion_threshold ? 1 : 0;
    }
  }
  std::vector<Blob> blobs;
  std::vector<char> visited(flow.size(), 0);
  for (std::size_t start = 0; start < flow.size(); ++start) {
    if (!moving[start] || visited[start]) continue;
    std::vector<std::size_t> stack{start};
    visited[start] = 1;
    Blob acc;
    int count = 0;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
      acc.x += x;
      acc.y += y;
      acc.vx += flow[i].vx;
      acc.vy += flow[i].vy;
      ++count;
      const int nx[4] = {x - 1, x + 1, x, x};
      const int ny[4] = {y, y, y - 1, y + 1};
      for (int k = 0; k < 4; ++k) {
        if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= h) continue;
        const std::size_t j = static_cast<std::size_t>(ny[k]) * w + nx[k];
        if (moving[j] && !visited[j]) {
          visited[j] = 1;
          stack.push_back(j);
        }
      }
    }
    if (count < opts.min_pixels) continue;
    blobs.push_back({acc.x / count, acc.y / count, acc.vx / count, acc.vy / count});
  }
  return blobs;
}

}  // namespace

std::vector<ObjectTrack> track_objects(std::span<const GrayFrame> frames, const ObjectDetectionOptions& opts) {
  if (frames.size() < 2) fail(ErrorKind::precondition, "object tracking needs at least 2 frames");
  for (const auto& f : frames) {
    if (f.width != frames[0].width || f.height != frames[0].height) {
      fail(ErrorKind::precondition, "frame size mismatch in sequence");
    }
  }
  const double gate = 2.0 * opts.max_displacement;
  std::vector<ObjectTrack> tracks;
  std::vector<std::size_t> active;  // indices into tracks, alive at the previous frame
  int next_id = 0;
  const int n = static_cast<int>(frames.size());
  for (int f = 0; f < n; ++f) {
    std::vector<Blob> blobs = f + 1 < n ? moving_blobs(frames[f], frames[f + 1], opts)
                                        : moving_blobs(frames[f], frames[f - 1], opts);
    std::vector<std::size_t> still_active;
    std::vector<char> used(blobs.size(), 0);
    for (std::size_t ti : active) {
      ObjectTrack& t = tracks[ti];
      const auto& last = t.positions.back();
      // Predict with the last displacement when available.
      double px = last.first, py = last.second;
      if (t.positions.size() >= 2) {
        const auto& before = t.positions[t.positions.size() - 2];
        px += last.first - before.first;
        py += last.second - before.second;
      }
      double best = gate;
      std::size_t best_k = blobs.size();
      for (std::size_t k = 0; k < blobs.size(); ++k) {
        if (used[k]) continue;
        const double d = std::hypot(blobs[k].x - px, blobs[k].y - py);
        if (d <= best) {
          best = d;
          best_k = k;
        }
      }
      if (best_k < blobs.size()) {
        used[best_k] = 1;
        t.positions.emplace_back(blobs[best_k].x, blobs[best_k].y);
        still_active.push_back(ti);
      }
    }
    for (std::size_t k = 0; k < blobs.size(); ++k) {
      if (used[k]) continue;
      tracks.push_back({next_id++, f, {{blobs[k].x, blobs[k].y}}});
      still_active.push_back(tracks.size() - 1);
    }
    active = std::move(still_active);
  }
  return tracks;
}

json states_to_json(std::span<const MotionStateVector> states) {
  json frames = json::array();
  for (const auto& s : states) {
    json objs = json::array();
    for (const auto& r : s.rows) objs.push_back({{"id", r.object_id}, {"x", r.x}, {"y", r.y}, {"vx", r.vx}, {"vy", r.vy}});
    frames.push_back({{"frame", s.frame_index}, {"objects", objs}});
  }
  return {{"frames", frames}};
}

std::vector<MotionStateVector> states_from_json(const json& j) {
  std::vector<MotionStateVector> out;
  try {
    for (const auto& jf : j.at("frames")) {
      MotionStateVector s;
      s.frame_index = jf.at("frame").get<int>();
      for (const auto& o : jf.at("objects")) {
        StateRow r{o.at("id").get<int>(), o.at("x").get<double>(), o.at("y").get<double>(),
                   o.at("vx").get<double>(), o.at("vy").get<double>()};
        if (!std::isfinite(r.x) || !std::isfinite(r.y) || !std::isfinite(r.vx) || !std::isfinite(r.vy)) {
          fail(ErrorKind::parse, "non-finite motion state");
        }
        for (const auto& prev : s.rows) {
          if (prev.object_id == r.object_id) fail(ErrorKind::parse, "duplicate object id within a frame");
        }
        s.rows.push_back(r);
      }
      out.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::parse, std::string("malformed flow-field JSON: ") + e.what());
  }
  return out;
}

json key_frames_to_json(const KeyFrameSequence& k) {
  return {{"indices", k.indices}, {"deviations", k.deviations}, {"tau", k.tau}};
}

std::vector<GrayFrame> load_frame_directory(const std::string& dir, double frame_interval) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) fail(ErrorKind::io, "frame directory '" + dir + "' does not exist");
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto ext = e.path().extension().string();
    if (e.is_regular_file() && (ext == ".pgm" || ext == ".ppm")) files.push_back(e.path().string());
  }
  std::sort(files.begin(), files.end());
  std::vector<GrayFrame> frames;
  for (std::size_t i = 0; i < files.size(); ++i) {
    GrayFrame g = read_pnm(files[i]);
    g.timestamp = static_cast<double>(i) * frame_interval;
    frames.push_back(std::move(g));
  }
  return frames;
}

}  // namespace scenforge::flowkey
