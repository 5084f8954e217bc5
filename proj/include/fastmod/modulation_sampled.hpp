#pragma once

#include <span>
#include <vector>

#include "fastmod/obstacle_world.hpp"

namespace fastmod {

/// Timestamped batch of sampled surface points (world frame).
struct ScanPointSet {
  std::vector<Vec2> points;
  double timestamp = 0.0;       // s
  double sampling_angle = 7e-3; // delta [rad], angular spacing of the beams
};

struct PointGeometry {
  std::vector<Vec2> references;  // unit, agent -> point
  std::vector<double> distances; // ||p - x|| - R
};

/// Per-point reference directions and clearances. Throws ContactError listing
/// every point with clearance <= 0.
PointGeometry point_reference_and_distance(const Vec2& x, std::span<const Vec2> points,
                                           double agent_radius);

/// Scale applied to the summed point weights so that a wall D_gap away yields
/// a reference magnitude of at most one.
double distance_weight_norm(double gap_distance, double sampling_angle, double distance_scaling);

/// Sum over points of w_norm * (D_scal / D_i) * r_i. Zero for an empty scan.
Vec2 aggregated_reference(std::span<const Vec2> points, const Vec2& x, const AgentConfig& config,
                          double sampling_angle);

/// Reference eigenvalue in [-1, 1]. `radial_velocity` is <r, v> with r the
/// unit aggregated reference (toward the points).
double eigenvalue_reference_sampled(double reference_norm, double radial_velocity);

/// Convenience overload taking the aggregated reference and the velocity.
double eigenvalue_reference_sampled(const Vec2& aggregated, const Vec2& velocity);

/// Tangent eigenvalue in [0, 2].
double eigenvalue_tangent_sampled(double reference_norm);

/// E diag(lambda_r, lambda_e) E^T v with the orthonormal basis E = [r, r_perp];
/// identity when the aggregated reference vanishes.
Vec2 modulate_with_sampled_reference(const Vec2& aggregated, const Vec2& nominal);

Vec2 modulate_sampled(const Vec2& x, const Vec2& nominal, const ScanPointSet& scan,
                      const AgentConfig& config);

/// Robot-relative margin that covers a corner missed between two beams.
double missed_edge_margin(double sampling_angle, double min_obstacle_angle);

/// True when an obstacle with curvature ratio R_obs / R_robot is still
/// resolved safely by the beam spacing.
bool is_safely_resolvable(double curvature_ratio, double sampling_angle, double min_obstacle_angle);

}  // namespace fastmod
