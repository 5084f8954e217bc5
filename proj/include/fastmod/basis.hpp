#pragma once

#include <Eigen/Dense>

#include "fastmod/geometry.hpp"

namespace fastmod {

/// Orthonormal basis of the hyperplane orthogonal to the unit vector `normal`,
/// returned as the d x (d-1) column block of a Householder reflection. The
/// result depends only on the line spanned by `normal`, so flipping its sign
/// yields the same basis.
Eigen::MatrixXd tangent_basis(const Eigen::VectorXd& normal);

/// E = [reference, tangent_basis(normal)].
Eigen::MatrixXd decomposition_basis(const Eigen::VectorXd& reference, const Eigen::VectorXd& normal);

/// M = E diag(eigen_reference, eigen_tangent, ..., eigen_tangent) E^-1 for any dimension.
Eigen::MatrixXd modulation_matrix(const Eigen::VectorXd& reference, const Eigen::VectorXd& normal,
                                  double eigen_reference, double eigen_tangent);

/// 2D tangent for a unit normal (counter-clockwise perpendicular).
inline Vec2 tangent_2d(const Vec2& normal) { return perp(normal); }

/// 2D fast path of modulation_matrix(...) * v with a closed-form inverse of E.
Vec2 apply_modulation_2d(const Vec2& reference, const Vec2& normal, double eigen_reference,
                         double eigen_tangent, const Vec2& v);

}  // namespace fastmod
