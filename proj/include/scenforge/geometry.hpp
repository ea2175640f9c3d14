// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

namespace scenforge {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double k) const { return {x * k, y * k}; }
  constexpr Vec2 operator/(double k) const { return {x / k, y / k}; }
  constexpr bool operator==(const Vec2&) const = default;

  double norm() const { return std::hypot(x, y); }
  constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
  /// z component of the 3D cross product; positive when `o` is counter-clockwise from this.
  constexpr double cross(Vec2 o) const { return x * o.y - y * o.x; }
  Vec2 normalized() const {
    const double n = norm();
    return n > 0.0 ? Vec2{x / n, y / n} : Vec2{};
  }
  /// Rotated +90 degrees (points to the left of this direction).
  constexpr Vec2 left() const { return {-y, x}; }
};

inline Vec2 lerp(Vec2 a, Vec2 b, double t) { return a + (b - a) * t; }

inline Vec2 unit_from_heading(double heading) { return {std::cos(heading), std::sin(heading)}; }

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

/// Oriented rectangle footprint.
struct OrientedBox {
  Vec2 center;
  double heading = 0.0;
  double half_length = 0.0;
  double half_width = 0.0;

  std::array<Vec2, 4> corners() const;
};

/// Separating-axis overlap test; boxes penetrating by no more than `tolerance`
/// meters along their best separating axis are reported as not overlapping.
bool boxes_overlap(const OrientedBox& a, const OrientedBox& b, double tolerance = 0.0);

/// Boundary-to-boundary distance; zero when the boxes overlap.
double box_distance(const OrientedBox& a, const OrientedBox& b);

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);

/// Arc-length parameterised polyline.
class Polyline {
 public:
  Polyline() = default;
  explicit Polyline(std::vector<Vec2> points);

  const std::vector<Vec2>& points() const { return points_; }
  double length() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
  bool empty() const { return points_.empty(); }

  Vec2 point_at(double s) const;
  /// Unit tangent at arc length `s`.
  Vec2 tangent_at(double s) const;
  double heading_at(double s) const;

  struct Projection {
    double s = 0.0;        // arc length of the closest point
    double lateral = 0.0;  // signed offset, positive to the left of the direction of travel
    double distance = 0.0;
  };
  Projection project(Vec2 p) const;

  /// `count` points spaced uniformly in arc length (count >= 2).
  std::vector<Vec2> resample(std::size_t count) const;

 private:
  std::vector<Vec2> points_;
  std::vector<double> cumulative_;
};

}  // namespace scenforge
