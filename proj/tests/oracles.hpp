#pragma once

// Reference computations that avoid the library's own geometry code paths.

#include <cmath>
#include <functional>
#include <optional>
#include <random>

#include "fastmod/obstacle_world.hpp"

namespace oracle {

using fastmod::Vec2;

/// Implicit inside test of a raw shape: negative inside, positive outside.
using Implicit = std::function<double(const Vec2&)>;

inline Implicit ellipse(Vec2 c, double a, double b, double orientation) {
  return [=](const Vec2& p) {
    const Vec2 q = fastmod::rotate(p - c, -orientation);
    return q.x() * q.x() / (a * a) + q.y() * q.y() / (b * b) - 1.0;
  };
}

/// Convex polygon with counter-clockwise world vertices.
inline Implicit polygon(std::vector<Vec2> v) {
  return [v](const Vec2& p) {
    double worst = -1e300;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Vec2& a = v[i];
      const Vec2& b = v[(i + 1) % v.size()];
      const Vec2 n = Vec2(b.y() - a.y(), a.x() - b.x()).normalized();
      worst = std::max(worst, n.dot(p - a));
    }
    return worst;
  };
}

/// Boundary distance along a ray from an interior origin by bisection on the sign change.
inline double ray_exit(const Implicit& f, const Vec2& origin, const Vec2& dir) {
  double lo = 0.0;
  double hi = 1.0;
  while (f(origin + hi * dir) <= 0.0) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(origin + mid * dir) <= 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Outward unit normal by central differences of the implicit function.
inline Vec2 normal(const Implicit& f, const Vec2& p, double h = 1e-6) {
  const Vec2 g((f(p + Vec2(h, 0)) - f(p - Vec2(h, 0))) / (2 * h),
               (f(p + Vec2(0, h)) - f(p - Vec2(0, h))) / (2 * h));
  return g.normalized();
}

/// First hit of a ray from an exterior origin by marching on the signed distance, then bisection.
inline std::optional<double> march(const std::function<double(const Vec2&)>& signed_distance,
                                   const Vec2& origin, const Vec2& dir, double max_range,
                                   double step = 1e-3) {
  double prev = 0.0;
  for (double t = step; t <= max_range + step; t += step) {
    if (signed_distance(origin + t * dir) <= 0.0) {
      double lo = prev;
      double hi = t;
      for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        (signed_distance(origin + mid * dir) <= 0.0 ? hi : lo) = mid;
      }
      const double hit = 0.5 * (lo + hi);
      if (hit > max_range) return std::nullopt;
      return hit;
    }
    prev = t;
  }
  return std::nullopt;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace oracle
