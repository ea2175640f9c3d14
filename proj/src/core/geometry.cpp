// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "scenforge/geometry.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <numbers>

#include "scenforge/common.hpp"

namespace scenforge {

double wrap_angle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

std::array<Vec2, 4> OrientedBox::corners() const {
  const Vec2 f = unit_from_heading(heading) * half_length;
  const Vec2 l = unit_from_heading(heading).left() * half_width;
  return {center + f + l, center + f - l, center - f - l, center - f + l};
}

namespace {

// Interval of projections of a box onto `axis`.
std::pair<double, double> project_box(const std::array<Vec2, 4>& c, Vec2 axis) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Vec2& p : c) {
    const double v = p.dot(axis);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

}  // namespace

bool boxes_overlap(const OrientedBox& a, const OrientedBox& b, double tolerance) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  const std::array<Vec2, 4> axes = {unit_from_heading(a.heading),
                                    unit_from_heading(a.heading).left(),
                                    unit_from_heading(b.heading),
                                    unit_from_heading(b.heading).left()};
  for (const Vec2& axis : axes) {
    const auto [alo, ahi] = project_box(ca, axis);
    const auto [blo, bhi] = project_box(cb, axis);
    const double penetration = std::min(ahi, bhi) - std::max(alo, blo);
    if (penetration <= tolerance) return false;
  }
  return true;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = ab.dot(ab);
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + ab * t)).norm();
}

double box_distance(const OrientedBox& a, const OrientedBox& b) {
  if (boxes_overlap(a, b)) return 0.0;
  const auto ca = a.corners();
  const auto cb = b.corners();
  double best = std::numeric_limits<double>::infinity();
  // For disjoint convex polygons the minimum distance is attained between a
  // vertex of one and an edge of the other.
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      best = std::min(best, point_segment_distance(ca[i], cb[j], cb[(j + 1) % 4]));
      best = std::min(best, point_segment_distance(cb[i], ca[j], ca[(j + 1) % 4]));
    }
  }
  return best;
}

Polyline::Polyline(std::vector<Vec2> points) : points_(std::move(points)) {
  cumulative_.reserve(points_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (i > 0) acc += (points_[i] - points_[i - 1]).norm();
    cumulative_.push_back(acc);
  }
}

Vec2 Polyline::point_at(double s) const {
  require(!points_.empty(), "point_at on empty polyline");
  if (points_.size() == 1 || s <= 0.0) return points_.front();
  if (s >= length()) return points_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  const std::size_t i = static_cast<std::size_t>(it - cumulative_.begin());
  const double seg = cumulative_[i] - cumulative_[i - 1];
  const double t = seg > 0.0 ? (s - cumulative_[i - 1]) / seg : 0.0;
  return lerp(points_[i - 1], points_[i], t);
}

Vec2 Polyline::tangent_at(double s) const {
  require(points_.size() >= 2, "tangent_at needs two points");
  std::size_t i = 1;
  if (s >= length()) {
    i = points_.size() - 1;
  } else if (s > 0.0) {
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
    i = static_cast<std::size_t>(it - cumulative_.begin());
  }
  // Skip zero-length segments.
  while (i < points_.size() - 1 && (points_[i] - points_[i - 1]).norm() == 0.0) ++i;
  return (points_[i] - points_[i - 1]).normalized();
}

double Polyline::heading_at(double s) const {
  const Vec2 t = tangent_at(s);
  return std::atan2(t.y, t.x);
}

Polyline::Projection Polyline::project(Vec2 p) const {
  require(!points_.empty(), "project on empty polyline");
  Projection best;
  best.distance = std::numeric_limits<double>::infinity();
  if (points_.size() == 1) {
    best.distance = (p - points_[0]).norm();
    return best;
  }
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const Vec2 a = points_[i - 1];
    const Vec2 ab = points_[i] - a;
    const double len2 = ab.dot(ab);
    if (len2 == 0.0) continue;
    const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    const Vec2 q = a + ab * t;
    const double d = (p - q).norm();
    if (d < best.distance) {
      best.distance = d;
      best.s = cumulative_[i - 1] + t * std::sqrt(len2);
      const double side = ab.cross(p - a);
      best.lateral = side >= 0.0 ? d : -d;
    }
  }
  return best;
}

std::vector<Vec2> Polyline::resample(std::size_t count) const {
  require(count >= 2, "resample count must be >= 2");
  std::vector<Vec2> out;
  out.reserve(count);
  const double len = length();
  for (std::size_t k = 0; k < count; ++k) {
    out.push_back(point_at(len * static_cast<double>(k) / static_cast<double>(count - 1)));
  }
  return out;
}

}  // namespace scenforge
