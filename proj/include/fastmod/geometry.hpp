#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace fastmod {

/// Planar position or velocity. Positions in meters, velocities in m/s.
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kPi = 3.14159265358979323846;

/// Planar robot pose: wheel-axle midpoint and heading.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Vec2 position() const { return {x, y}; }
  Vec2 heading() const { return {std::cos(theta), std::sin(theta)}; }
};

inline Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

/// Counter-clockwise perpendicular.
inline Vec2 perp(const Vec2& v) { return {-v.y(), v.x()}; }

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

inline double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a - kPi;
}

}  // namespace fastmod
