#include "fastmod/modulation_sampled.hpp"

#include <cmath>
#include <limits>

namespace fastmod {

namespace {

[[noreturn]] void throw_contact(const Vec2& x, std::span<const Vec2> points, double radius) {
  std::vector<std::size_t> offending;
  double min_distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = (points[i] - x).norm() - radius;
    min_distance = std::min(min_distance, d);
    if (!(d > 0.0)) offending.push_back(i);
  }
  throw ContactError(std::move(offending), min_distance);
}

}  // namespace

PointGeometry point_reference_and_distance(const Vec2& x, std::span<const Vec2> points,
                                           double agent_radius) {
  PointGeometry g;
  g.references.reserve(points.size());
  g.distances.reserve(points.size());
  for (const Vec2& p : points) {
    const Vec2 d = p - x;
    const double range = d.norm();
    const double clearance = range - agent_radius;
    if (!(clearance > 0.0)) throw_contact(x, points, agent_radius);
    g.references.push_back(d / range);
    g.distances.push_back(clearance);
  }
  return g;
}

double distance_weight_norm(double gap_distance, double sampling_angle, double distance_scaling) {
  return gap_distance * sampling_angle / (2.0 * distance_scaling);
}

Vec2 aggregated_reference(std::span<const Vec2> points, const Vec2& x, const AgentConfig& config,
                          double sampling_angle) {
  // Fixed-order reduction keeps the result bitwise reproducible.
  double sx = 0.0;
  double sy = 0.0;
  bool contact = false;
  const double radius = config.radius;
  for (const Vec2& p : points) {
    const double dx = p.x() - x.x();
    const double dy = p.y() - x.y();
    const double range = std::sqrt(dx * dx + dy * dy);
    const double clearance = range - radius;
    contact |= !(clearance > 0.0);
    // (D_scal / D_i) * r_i with r_i = d / range
    const double w = config.distance_scaling / (clearance * range);
    sx += w * dx;
    sy += w * dy;
  }
  if (contact) throw_contact(x, points, radius);
  const double norm =
      distance_weight_norm(config.gap_distance, sampling_angle, config.distance_scaling);
  return {norm * sx, norm * sy};
}

double eigenvalue_reference_sampled(double reference_norm, double radial_velocity) {
  const double base = reference_norm < 2.0 ? std::cos(0.5 * kPi * reference_norm) : -1.0;
  if (radial_velocity < 0.0 && reference_norm > 1.0) return -base;
  return base;
}

double eigenvalue_reference_sampled(const Vec2& aggregated, const Vec2& velocity) {
  const double norm = aggregated.norm();
  const double radial = norm > 0.0 ? aggregated.dot(velocity) / norm : 0.0;
  return eigenvalue_reference_sampled(norm, radial);
}

double eigenvalue_tangent_sampled(double reference_norm) {
  if (reference_norm < 1.0) return 1.0 + std::sin(0.5 * kPi * reference_norm);
  return 2.0 * std::sin(kPi / (2.0 * reference_norm));
}

Vec2 modulate_with_sampled_reference(const Vec2& aggregated, const Vec2& nominal) {
  const double norm = aggregated.norm();
  if (norm == 0.0) return nominal;
  const Vec2 r = aggregated / norm;
  const Vec2 e = perp(r);
  const double radial = r.dot(nominal);
  const double tangential = e.dot(nominal);
  const double lambda_r = eigenvalue_reference_sampled(norm, radial);
  const double lambda_e = eigenvalue_tangent_sampled(norm);
  return lambda_r * radial * r + lambda_e * tangential * e;
}

Vec2 modulate_sampled(const Vec2& x, const Vec2& nominal, const ScanPointSet& scan,
                      const AgentConfig& config) {
  if (scan.points.empty()) return nominal;
  return modulate_with_sampled_reference(
      aggregated_reference(scan.points, x, config, scan.sampling_angle), nominal);
}

double missed_edge_margin(double sampling_angle, double min_obstacle_angle) {
  const double half = 0.5 * sampling_angle;
  return std::sin(half) / std::tan(0.5 * min_obstacle_angle) + (1.0 - std::cos(half));
}

bool is_safely_resolvable(double curvature_ratio, double sampling_angle, double min_obstacle_angle) {
  return curvature_ratio > std::sin(0.5 * sampling_angle) / std::cos(0.5 * min_obstacle_angle);
}

}  // namespace fastmod
