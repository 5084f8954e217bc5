#include "fastmod/obstacle_world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace fastmod {

void AgentConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorKind::kInvalidConfig, what);
  };
  require(radius > 0.0, "agent radius must be positive");
  require(gap_distance > 0.0, "gap distance must be positive");
  require(control_point_offset >= 0.0, "control point offset must be non-negative");
  require(reactivity > 0.0, "reactivity must be positive");
  require(scaling_potential > 0.0, "scaling potential must be positive");
  require(distance_scaling > 0.0, "distance scaling must be positive");
  require(power_weight > 0.0, "power weight must be positive");
}

namespace {

struct ClosestPoint {
  Vec2 point;
  double distance;
  bool inside;
};

// Bisection root of the closest-point equation for an ellipse with e0 >= e1,
// evaluated in the first quadrant (D. Eberly, "Distance from a point to an ellipse").
double ellipse_root(double r0, double z0, double z1, double g) {
  const double n0 = r0 * z0;
  double s0 = z1 - 1.0;
  double s1 = g < 0.0 ? 0.0 : std::hypot(n0, z1) - 1.0;
  double s = 0.0;
  for (int i = 0; i < 1100; ++i) {
    s = 0.5 * (s0 + s1);
    if (s == s0 || s == s1) break;
    const double ratio0 = n0 / (s + r0);
    const double ratio1 = z1 / (s + 1.0);
    const double gs = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
    if (gs > 0.0) {
      s0 = s;
    } else if (gs < 0.0) {
      s1 = s;
    } else {
      break;
    }
  }
  return s;
}

// Closest point on the ellipse x^2/e0^2 + y^2/e1^2 = 1 to (y0, y1), e0 >= e1, y0, y1 >= 0.
Vec2 ellipse_closest_first_quadrant(double e0, double e1, double y0, double y1) {
  if (y1 > 0.0) {
    if (y0 > 0.0) {
      const double z0 = y0 / e0;
      const double z1 = y1 / e1;
      const double g = z0 * z0 + z1 * z1 - 1.0;
      if (g != 0.0) {
        const double r0 = (e0 / e1) * (e0 / e1);
        const double sbar = ellipse_root(r0, z0, z1, g);
        return {r0 * y0 / (sbar + r0), y1 / (sbar + 1.0)};
      }
      return {y0, y1};
    }
    return {0.0, e1};
  }
  const double numer0 = e0 * y0;
  const double denom0 = e0 * e0 - e1 * e1;
  if (numer0 < denom0) {
    const double xde0 = numer0 / denom0;
    return {e0 * xde0, e1 * std::sqrt(std::max(0.0, 1.0 - xde0 * xde0))};
  }
  return {e0, 0.0};
}

ClosestPoint ellipse_closest(double a, double b, const Vec2& q) {
  const bool swap = a < b;
  const double e0 = swap ? b : a;
  const double e1 = swap ? a : b;
  const double qx = swap ? q.y() : q.x();
  const double qy = swap ? q.x() : q.y();
  Vec2 c = ellipse_closest_first_quadrant(e0, e1, std::abs(qx), std::abs(qy));
  c.x() = std::copysign(c.x(), qx);
  c.y() = std::copysign(c.y(), qy);
  if (swap) std::swap(c.x(), c.y());
  const bool inside = (q.x() * q.x()) / (a * a) + (q.y() * q.y()) / (b * b) < 1.0;
  return {c, (q - c).norm(), inside};
}

// Exit distance of the ray p + t u (p strictly inside) through the raw ellipse.
double ellipse_ray_exit(double a, double b, const Vec2& p, const Vec2& u) {
  const double ia2 = 1.0 / (a * a);
  const double ib2 = 1.0 / (b * b);
  const double qa = u.x() * u.x() * ia2 + u.y() * u.y() * ib2;
  const double qb = 2.0 * (p.x() * u.x() * ia2 + p.y() * u.y() * ib2);
  const double qc = p.x() * p.x() * ia2 + p.y() * p.y() * ib2 - 1.0;
  const double disc = std::max(0.0, qb * qb - 4.0 * qa * qc);
  // Numerically stable positive root (qc < 0 so the roots have opposite signs).
  const double sq = std::sqrt(disc);
  if (qb >= 0.0) return (-2.0 * qc) / (qb + sq);
  return (-qb + sq) / (2.0 * qa);
}

Vec2 ellipse_gradient_normal(double a, double b, const Vec2& q) {
  return Vec2(q.x() / (a * a), q.y() / (b * b)).normalized();
}

double segment_distance(const Vec2& q, const Vec2& a, const Vec2& b) {
  const Vec2 w = b - a;
  const double len2 = w.squaredNorm();
  double s = len2 > 0.0 ? (q - a).dot(w) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return (q - (a + s * w)).norm();
}

}  // namespace

StarObstacle::StarObstacle(Shape shape, Vec2 center, double orientation,
                           std::optional<Vec2> reference_point, double margin,
                           Vec2 linear_velocity, double angular_velocity)
    : shape_(std::move(shape)),
      center_(center),
      orientation_(orientation),
      reference_body_(Vec2::Zero()),
      margin_(margin),
      linear_velocity_(linear_velocity),
      angular_velocity_(angular_velocity) {
  if (!(margin_ >= 0.0)) throw Error(ErrorKind::kInvalidConfig, "margin must be non-negative");
  if (const auto* e = std::get_if<Ellipse>(&shape_)) {
    if (!(e->semi_axis_a > 0.0 && e->semi_axis_b > 0.0))
      throw Error(ErrorKind::kInvalidConfig, "ellipse semi-axes must be positive");
  } else if (const auto* c = std::get_if<Circle>(&shape_)) {
    if (!(c->radius > 0.0)) throw Error(ErrorKind::kInvalidConfig, "circle radius must be positive");
  } else {
    initialise_polygon();
  }
  if (reference_point) {
    reference_body_ = to_body(*reference_point);
    if (!raw_contains(*reference_point))
      throw Error(ErrorKind::kInvalidConfig, "reference point must lie strictly inside the shape");
  } else if (!raw_contains(center_)) {
    throw Error(ErrorKind::kInvalidConfig, "obstacle center is not inside the shape");
  }
}

void StarObstacle::initialise_polygon() {
  auto& vertices = std::get<ConvexPolygon>(shape_).vertices;
  if (vertices.size() < 3) throw Error(ErrorKind::kInvalidConfig, "polygon needs >= 3 vertices");
  double area2 = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    area2 += cross(vertices[i], vertices[(i + 1) % vertices.size()]);
  }
  if (area2 < 0.0) std::reverse(vertices.begin(), vertices.end());
  const std::size_t n = vertices.size();
  edge_normals_.clear();
  edge_normals_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 edge = vertices[(i + 1) % n] - vertices[i];
    const Vec2 next = vertices[(i + 2) % n] - vertices[(i + 1) % n];
    if (edge.norm() <= 0.0 || cross(edge, next) <= 0.0)
      throw Error(ErrorKind::kInvalidConfig, "polygon must be strictly convex");
    edge_normals_.push_back(Vec2(edge.y(), -edge.x()).normalized());
  }
}

StarObstacle StarObstacle::circle(Vec2 center, double radius, double margin) {
  return StarObstacle(Circle{radius}, center, 0.0, std::nullopt, margin);
}

StarObstacle StarObstacle::ellipse(Vec2 center, double semi_axis_a, double semi_axis_b,
                                   double orientation, double margin) {
  return StarObstacle(Ellipse{semi_axis_a, semi_axis_b}, center, orientation, std::nullopt, margin);
}

StarObstacle StarObstacle::box(Vec2 center, double width, double height, double orientation,
                               double margin) {
  const double hw = 0.5 * width;
  const double hh = 0.5 * height;
  return polygon(center, {{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}}, orientation, margin);
}

StarObstacle StarObstacle::polygon(Vec2 center, std::vector<Vec2> body_vertices,
                                   double orientation, double margin) {
  return StarObstacle(ConvexPolygon{std::move(body_vertices)}, center, orientation, std::nullopt,
                      margin);
}

Vec2 StarObstacle::to_body(const Vec2& world) const { return rotate(world - center_, -orientation_); }
Vec2 StarObstacle::to_world(const Vec2& body) const { return center_ + rotate(body, orientation_); }
Vec2 StarObstacle::direction_to_body(const Vec2& d) const { return rotate(d, -orientation_); }
Vec2 StarObstacle::direction_to_world(const Vec2& d) const { return rotate(d, orientation_); }

StarObstacle StarObstacle::inflated(double extra) const {
  StarObstacle copy = *this;
  copy.margin_ += extra;
  if (!(copy.margin_ >= 0.0)) throw Error(ErrorKind::kInvalidConfig, "margin must be non-negative");
  return copy;
}

StarObstacle StarObstacle::advanced(double dt) const {
  StarObstacle copy = *this;
  copy.center_ += linear_velocity_ * dt;
  copy.orientation_ += angular_velocity_ * dt;
  return copy;
}

StarObstacle StarObstacle::with_velocity(Vec2 linear, double angular) const {
  StarObstacle copy = *this;
  copy.linear_velocity_ = linear;
  copy.angular_velocity_ = angular;
  return copy;
}

Vec2 StarObstacle::velocity_at(const Vec2& world_point) const {
  return linear_velocity_ + angular_velocity_ * perp(world_point - center_);
}

bool StarObstacle::raw_contains(const Vec2& world_point) const {
  const Vec2 q = to_body(world_point);
  if (const auto* e = std::get_if<Ellipse>(&shape_)) {
    return (q.x() * q.x()) / (e->semi_axis_a * e->semi_axis_a) +
               (q.y() * q.y()) / (e->semi_axis_b * e->semi_axis_b) <
           1.0;
  }
  if (const auto* c = std::get_if<Circle>(&shape_)) return q.norm() < c->radius;
  const auto& vertices = std::get<ConvexPolygon>(shape_).vertices;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (edge_normals_[i].dot(q - vertices[i]) >= 0.0) return false;
  }
  return true;
}

StarObstacle::RayHit StarObstacle::ray_exit(const Vec2& world_dir) const {
  const Vec2 u = direction_to_body(world_dir);
  const Vec2& p = reference_body_;
  RayHit hit;

  if (const auto* c = std::get_if<Circle>(&shape_)) {
    const double r = c->radius + margin_;
    const double b = p.dot(u);
    const double cc = p.squaredNorm() - r * r;
    hit.distance = -b + std::sqrt(std::max(0.0, b * b - cc));
    hit.normal = direction_to_world((p + hit.distance * u).normalized());
    return hit;
  }

  if (const auto* e = std::get_if<Ellipse>(&shape_)) {
    const double a = e->semi_axis_a;
    const double bb = e->semi_axis_b;
    const double t_raw = ellipse_ray_exit(a, bb, p, u);
    if (margin_ == 0.0) {
      hit.distance = t_raw;
      hit.normal = direction_to_world(ellipse_gradient_normal(a, bb, p + t_raw * u));
      return hit;
    }
    // Minkowski inflation: solve dist(p + t u, ellipse) = margin on a bracket
    // given by the supporting line at the raw exit point.
    const Vec2 raw_normal = ellipse_gradient_normal(a, bb, p + t_raw * u);
    double lo = t_raw;
    double hi = t_raw + margin_ / std::max(raw_normal.dot(u), 1e-12);
    double t = std::min(t_raw + margin_, hi);
    Vec2 normal = raw_normal;
    for (int i = 0; i < 100; ++i) {
      const Vec2 q = p + t * u;
      const ClosestPoint cp = ellipse_closest(a, bb, q);
      const double f = cp.distance - margin_;
      if (cp.distance > 0.0) normal = (q - cp.point) / cp.distance;
      if (std::abs(f) <= 1e-14 * (1.0 + margin_)) break;
      if (f < 0.0) {
        lo = t;
      } else {
        hi = t;
      }
      const double slope = normal.dot(u);
      double next = slope > 0.0 ? t - f / slope : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (next == t || hi - lo <= 1e-15 * (1.0 + hi)) break;
      t = next;
    }
    hit.distance = t;
    hit.normal = direction_to_world(normal);
    return hit;
  }

  const auto& vertices = std::get<ConvexPolygon>(shape_).vertices;
  const std::size_t n = vertices.size();
  if (margin_ == 0.0) {
    double best = std::numeric_limits<double>::infinity();
    double second = best;
    std::size_t best_edge = 0;
    std::size_t second_edge = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double denom = edge_normals_[i].dot(u);
      if (denom <= 0.0) continue;
      const double t = edge_normals_[i].dot(vertices[i] - p) / denom;
      if (t < best) {
        second = best;
        second_edge = best_edge;
        best = t;
        best_edge = i;
      } else if (t < second) {
        second = t;
        second_edge = i;
      }
    }
    hit.distance = best;
    Vec2 normal = edge_normals_[best_edge];
    // Exact vertex hit: bisector of the two adjacent faces.
    if (second - best <= 1e-12 * (1.0 + best)) {
      normal = (edge_normals_[best_edge] + edge_normals_[second_edge]).normalized();
    }
    hit.normal = direction_to_world(normal);
    return hit;
  }

  // Rounded polygon: offset faces plus vertex arcs. Every piece lies inside
  // the inflated convex set, so the exit is the farthest piece intersection.
  double best = 0.0;
  Vec2 normal = Vec2::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = vertices[i] + margin_ * edge_normals_[i];
    const Vec2 w = vertices[(i + 1) % n] + margin_ * edge_normals_[i] - a;
    const double denom = cross(u, w);
    if (std::abs(denom) > 1e-300) {
      const double t = cross(a - p, w) / denom;
      const double s = cross(a - p, u) / denom;
      if (s >= 0.0 && s <= 1.0 && t > best) {
        best = t;
        normal = edge_normals_[i];
      }
    }
    const Vec2 d = p - vertices[i];
    const double b = d.dot(u);
    const double disc = b * b - (d.squaredNorm() - margin_ * margin_);
    if (disc >= 0.0) {
      const double t = -b + std::sqrt(disc);
      if (t > best) {
        best = t;
        normal = (p + t * u - vertices[i]) / margin_;
      }
    }
  }
  hit.distance = best;
  hit.normal = direction_to_world(normal.normalized());
  return hit;
}

double StarObstacle::signed_distance(const Vec2& world_point) const {
  const Vec2 q = to_body(world_point);
  if (const auto* c = std::get_if<Circle>(&shape_)) return q.norm() - c->radius - margin_;
  if (const auto* e = std::get_if<Ellipse>(&shape_)) {
    const ClosestPoint cp = ellipse_closest(e->semi_axis_a, e->semi_axis_b, q);
    return (cp.inside ? -cp.distance : cp.distance) - margin_;
  }
  const auto& vertices = std::get<ConvexPolygon>(shape_).vertices;
  const std::size_t n = vertices.size();
  double max_plane = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    max_plane = std::max(max_plane, edge_normals_[i].dot(q - vertices[i]));
  }
  if (max_plane < 0.0) return max_plane - margin_;
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    d = std::min(d, segment_distance(q, vertices[i], vertices[(i + 1) % n]));
  }
  return d - margin_;
}

double StarObstacle::bounding_radius() const {
  if (const auto* c = std::get_if<Circle>(&shape_)) return c->radius + margin_;
  if (const auto* e = std::get_if<Ellipse>(&shape_))
    return std::max(e->semi_axis_a, e->semi_axis_b) + margin_;
  double r = 0.0;
  for (const Vec2& v : std::get<ConvexPolygon>(shape_).vertices) r = std::max(r, v.norm());
  return r + margin_;
}

double gamma(const StarObstacle& obstacle, const Vec2& x) {
  return query_surface(obstacle, x).gamma;
}

Vec2 reference_direction_analytic(const StarObstacle& obstacle, const Vec2& x) {
  const Vec2 d = x - obstacle.reference_point();
  const double norm = d.norm();
  if (norm == 0.0) throw Error(ErrorKind::kGammaSingularity, "query at the reference point");
  return d / norm;
}

SurfaceQuery query_surface(const StarObstacle& obstacle, const Vec2& x) {
  const Vec2 d = x - obstacle.reference_point();
  const double norm = d.norm();
  if (norm == 0.0) throw Error(ErrorKind::kGammaSingularity, "query at the reference point");
  SurfaceQuery q;
  q.reference = d / norm;
  const StarObstacle::RayHit hit = obstacle.ray_exit(q.reference);
  q.gamma = norm / hit.distance;
  q.normal = hit.normal;
  return q;
}

Vec2 surface_normal(const StarObstacle& obstacle, const Vec2& x) {
  const SurfaceQuery q = query_surface(obstacle, x);
  if (q.gamma < 1.0 - kBoundaryTolerance) {
    std::ostringstream os;
    os << "normal requested at interior point (gamma " << q.gamma << ")";
    throw Error(ErrorKind::kInsideObstacle, os.str());
  }
  return q.normal;
}

GammaRegion classify(std::span<const StarObstacle> obstacles, const Vec2& x,
                     const AgentConfig& config) {
  double min_gamma = std::numeric_limits<double>::infinity();
  for (const StarObstacle& o : obstacles) {
    if ((x - o.reference_point()).norm() == 0.0) return GammaRegion::kInterior;
    min_gamma = std::min(min_gamma, gamma(o, x));
  }
  if (std::abs(min_gamma - 1.0) <= kBoundaryTolerance) return GammaRegion::kBoundary;
  if (min_gamma < 1.0) return GammaRegion::kInterior;
  const double clearance = config.radius + config.gap_distance;
  for (const StarObstacle& o : obstacles) {
    if (o.signed_distance(x) < clearance) return GammaRegion::kExterior;
  }
  return GammaRegion::kMarginExterior;
}

}  // namespace fastmod
