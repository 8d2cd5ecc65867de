#pragma once

#include <array>
#include <cmath>

namespace racelab {

// World frame is image-aligned: x along columns (right), y along rows (down),
// yaw measured from +x toward +y. In this frame a positive steering angle
// turns the vehicle toward positive yaw, which reads as a right turn when the
// map is displayed with row 0 on top.

struct Vec2 {
  double x = 0.0, y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double norm() const { return std::sqrt(x * x + y * y); }
};

inline Vec2 heading(double yaw) { return {std::cos(yaw), std::sin(yaw)}; }

inline double wrap_angle(double a) {
  while (a > M_PI) a -= 2 * M_PI;
  while (a < -M_PI) a += 2 * M_PI;
  return a;
}

// Rectangle footprint: length along the heading, width across it.
struct OrientedRect {
  double cx = 0, cy = 0, yaw = 0, length = 0, width = 0;

  std::array<Vec2, 4> corners() const {
    double c = std::cos(yaw), s = std::sin(yaw);
    double hl = 0.5 * length, hw = 0.5 * width;
    auto pt = [&](double u, double v) {
      return Vec2{cx + u * c - v * s, cy + u * s + v * c};
    };
    return {pt(hl, hw), pt(hl, -hw), pt(-hl, -hw), pt(-hl, hw)};
  }

  bool contains(Vec2 p) const {
    double c = std::cos(yaw), s = std::sin(yaw);
    double dx = p.x - cx, dy = p.y - cy;
    double u = dx * c + dy * s;
    double v = -dx * s + dy * c;
    return std::abs(u) <= 0.5 * length && std::abs(v) <= 0.5 * width;
  }
};

// Separating-axis overlap test for two oriented rectangles.
bool rects_overlap(const OrientedRect& a, const OrientedRect& b);

// Distance along the ray (origin, direction by angle) to the rectangle's
// boundary; returns +inf when the ray misses. A ray starting inside hits the
// first edge crossed on the way out.
double ray_rect_distance(Vec2 origin, double angle, const OrientedRect& rect);

// Distance from point p to segment [a, b].
double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);

}  // namespace racelab
