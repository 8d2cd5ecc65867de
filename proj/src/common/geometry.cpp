#include "common/geometry.hpp"

#include <algorithm>
#include <limits>

namespace racelab {

bool rects_overlap(const OrientedRect& a, const OrientedRect& b) {
  auto ca = a.corners();
  auto cb = b.corners();
  // Candidate separating axes: edge normals of both rectangles.
  std::array<Vec2, 4> axes = {
      Vec2{std::cos(a.yaw), std::sin(a.yaw)},
      Vec2{-std::sin(a.yaw), std::cos(a.yaw)},
      Vec2{std::cos(b.yaw), std::sin(b.yaw)},
      Vec2{-std::sin(b.yaw), std::cos(b.yaw)},
  };
  for (const Vec2& axis : axes) {
    double amin = std::numeric_limits<double>::infinity(), amax = -amin;
    double bmin = amin, bmax = -amin;
    for (const Vec2& p : ca) {
      double v = p.dot(axis);
      amin = std::min(amin, v);
      amax = std::max(amax, v);
    }
    for (const Vec2& p : cb) {
      double v = p.dot(axis);
      bmin = std::min(bmin, v);
      bmax = std::max(bmax, v);
    }
    if (amax < bmin || bmax < amin) return false;
  }
  return true;
}

double ray_rect_distance(Vec2 origin, double angle, const OrientedRect& rect) {
  Vec2 d = heading(angle);
  auto corners = rect.corners();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    Vec2 a = corners[static_cast<size_t>(i)];
    Vec2 b = corners[static_cast<size_t>((i + 1) % 4)];
    Vec2 e = b - a;
    double denom = d.x * e.y - d.y * e.x;
    if (std::abs(denom) < 1e-12) continue;  // parallel
    Vec2 ao = a - origin;
    double t = (ao.x * e.y - ao.y * e.x) / denom;  // along the ray
    double u = (ao.x * d.y - ao.y * d.x) / denom;  // along the edge
    if (t >= 0.0 && u >= 0.0 && u <= 1.0) best = std::min(best, t);
  }
  return best;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  Vec2 ab = b - a;
  double len2 = ab.dot(ab);
  if (len2 <= 0.0) return (p - a).norm();
  double t = (p - a).dot(ab) / len2;
  t = std::clamp(t, 0.0, 1.0);
  Vec2 proj = a + ab * t;
  return (p - proj).norm();
}

}  // namespace racelab
