#pragma once

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "fastmod/errors.hpp"
#include "fastmod/geometry.hpp"

namespace fastmod {

/// Agent and controller parameters shared by every modulation path.
struct AgentConfig {
  double radius = 0.45;                  // R [m]
  double gap_distance = 0.1;             // D_gap [m]
  double control_point_offset = 0.0625;  // d_c [m]
  double reactivity = 1.0;               // rho
  double scaling_potential = 2.0;        // s
  double distance_scaling = 1.0;         // D_scal
  double power_weight = 0.2;             // c_w

  /// Throws Error(kInvalidConfig) when an invariant is violated.
  void validate() const;
};

struct Ellipse {
  double semi_axis_a = 1.0;  // along the body x axis
  double semi_axis_b = 1.0;
};

struct Circle {
  double radius = 1.0;
};

/// Convex polygon, vertices in the body frame (relative to the obstacle center).
struct ConvexPolygon {
  std::vector<Vec2> vertices;
};

using Shape = std::variant<Ellipse, Circle, ConvexPolygon>;

/// Analytic star-shaped obstacle.
///
/// The margin inflates the shape by a Minkowski disc of radius `margin`, so
/// the inflated surface is the set of points exactly `margin` away from the
/// raw shape. Gamma, normals, and distances all refer to the inflated surface.
class StarObstacle {
 public:
  /// reference_point defaults to the center; it must lie strictly inside the raw shape.
  StarObstacle(Shape shape, Vec2 center, double orientation = 0.0,
               std::optional<Vec2> reference_point = std::nullopt, double margin = 0.0,
               Vec2 linear_velocity = Vec2::Zero(), double angular_velocity = 0.0);

  static StarObstacle circle(Vec2 center, double radius, double margin = 0.0);
  static StarObstacle ellipse(Vec2 center, double semi_axis_a, double semi_axis_b,
                              double orientation = 0.0, double margin = 0.0);
  static StarObstacle box(Vec2 center, double width, double height, double orientation = 0.0,
                          double margin = 0.0);
  static StarObstacle polygon(Vec2 center, std::vector<Vec2> body_vertices,
                              double orientation = 0.0, double margin = 0.0);

  const Shape& shape() const { return shape_; }
  const Vec2& center() const { return center_; }
  double orientation() const { return orientation_; }
  double margin() const { return margin_; }
  const Vec2& linear_velocity() const { return linear_velocity_; }
  double angular_velocity() const { return angular_velocity_; }
  Vec2 reference_point() const { return to_world(reference_body_); }

  Vec2 to_body(const Vec2& world) const;
  Vec2 to_world(const Vec2& body) const;
  Vec2 direction_to_body(const Vec2& world_dir) const;
  Vec2 direction_to_world(const Vec2& body_dir) const;

  /// Copy with `extra` added to the margin (e.g. the agent radius).
  StarObstacle inflated(double extra) const;
  /// Copy moved by its rigid-body velocity over `dt` seconds.
  StarObstacle advanced(double dt) const;
  StarObstacle with_velocity(Vec2 linear, double angular) const;

  /// Rigid-body velocity of the obstacle frame evaluated at a world point.
  Vec2 velocity_at(const Vec2& world_point) const;

  /// Strict interior test on the raw (uninflated) shape.
  bool raw_contains(const Vec2& world_point) const;

  /// Ray from the reference point along a unit world direction: distance to
  /// the inflated surface and the outward unit normal there (world frame).
  struct RayHit {
    double distance = 0.0;
    Vec2 normal = Vec2::Zero();
  };
  RayHit ray_exit(const Vec2& world_dir) const;

  /// Signed Euclidean distance to the inflated surface (negative inside).
  double signed_distance(const Vec2& world_point) const;

  /// Bounding radius of the inflated shape around the center.
  double bounding_radius() const;

 private:
  void initialise_polygon();

  Shape shape_;
  Vec2 center_;
  double orientation_;
  Vec2 reference_body_;
  double margin_;
  Vec2 linear_velocity_;
  double angular_velocity_;
  std::vector<Vec2> edge_normals_;  // polygon only, body frame
};

enum class GammaRegion { kExterior, kMarginExterior, kBoundary, kInterior };

/// Relative tolerance for treating Gamma as exactly one.
inline constexpr double kBoundaryTolerance = 1e-9;

/// Ray-scaling distance function ||x - x_r|| / ||x_b - x_r||.
/// Throws Error(kGammaSingularity) at the reference point.
double gamma(const StarObstacle& obstacle, const Vec2& x);

/// Unit vector from the reference point toward x.
Vec2 reference_direction_analytic(const StarObstacle& obstacle, const Vec2& x);

/// Outward unit normal of the inflated surface where the ray x_r -> x leaves it.
/// Throws Error(kInsideObstacle) for interior queries.
Vec2 surface_normal(const StarObstacle& obstacle, const Vec2& x);

/// Everything the modulation needs from one obstacle at one point.
struct SurfaceQuery {
  double gamma = 0.0;
  Vec2 reference = Vec2::Zero();  // obstacle -> agent, unit
  Vec2 normal = Vec2::Zero();     // outward, unit
};
SurfaceQuery query_surface(const StarObstacle& obstacle, const Vec2& x);

GammaRegion classify(std::span<const StarObstacle> obstacles, const Vec2& x,
                     const AgentConfig& config);

}  // namespace fastmod
