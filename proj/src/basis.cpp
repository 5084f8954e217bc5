#include "fastmod/basis.hpp"

#include <cmath>

namespace fastmod {

Eigen::MatrixXd tangent_basis(const Eigen::VectorXd& normal) {
  const Eigen::Index d = normal.size();
  // Canonicalise the sign so that n and -n give the same reflection.
  Eigen::VectorXd n = normal.normalized();
  Eigen::Index pivot = 0;
  n.cwiseAbs().maxCoeff(&pivot);
  if (n(pivot) < 0.0) n = -n;
  // Householder H maps e_pivot to -n; its other columns span n-perp.
  Eigen::VectorXd v = n;
  v(pivot) += 1.0;
  const Eigen::MatrixXd h =
      Eigen::MatrixXd::Identity(d, d) - 2.0 * v * v.transpose() / v.squaredNorm();
  Eigen::MatrixXd basis(d, d - 1);
  Eigen::Index col = 0;
  for (Eigen::Index j = 0; j < d; ++j) {
    if (j == pivot) continue;
    basis.col(col++) = h.col(j);
  }
  return basis;
}

Eigen::MatrixXd decomposition_basis(const Eigen::VectorXd& reference, const Eigen::VectorXd& normal) {
  const Eigen::Index d = reference.size();
  Eigen::MatrixXd e(d, d);
  e.col(0) = reference;
  e.rightCols(d - 1) = tangent_basis(normal);
  return e;
}

Eigen::MatrixXd modulation_matrix(const Eigen::VectorXd& reference, const Eigen::VectorXd& normal,
                                  double eigen_reference, double eigen_tangent) {
  const Eigen::MatrixXd e = decomposition_basis(reference, normal);
  Eigen::VectorXd diag = Eigen::VectorXd::Constant(reference.size(), eigen_tangent);
  diag(0) = eigen_reference;
  // E is invertible but generally not orthonormal; solve instead of transposing.
  const Eigen::MatrixXd e_inv = e.partialPivLu().inverse();
  return e * diag.asDiagonal() * e_inv;
}

Vec2 apply_modulation_2d(const Vec2& reference, const Vec2& normal, double eigen_reference,
                         double eigen_tangent, const Vec2& v) {
  const Vec2 tangent = tangent_2d(normal);
  // E = [r t]; E^-1 v via Cramer's rule.
  const double det = cross(reference, tangent);
  const double coeff_r = cross(v, tangent) / det;
  const double coeff_t = cross(reference, v) / det;
  return eigen_reference * coeff_r * reference + eigen_tangent * coeff_t * tangent;
}

}  // namespace fastmod
