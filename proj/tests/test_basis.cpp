#include <gtest/gtest.h>

#include <random>

#include "fastmod/basis.hpp"

using namespace fastmod;

namespace {

Eigen::VectorXd random_unit(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = n(rng);
  return v.normalized();
}

}  // namespace

TEST(TangentBasis, OrthonormalAndOrthogonalToNormal) {
  std::mt19937_64 rng(3);
  for (int d = 2; d <= 5; ++d) {
    for (int k = 0; k < 50; ++k) {
      const Eigen::VectorXd n = random_unit(rng, d);
      const Eigen::MatrixXd t = tangent_basis(n);
      ASSERT_EQ(t.rows(), d);
      ASSERT_EQ(t.cols(), d - 1);
      EXPECT_NEAR((t.transpose() * t - Eigen::MatrixXd::Identity(d - 1, d - 1)).norm(), 0.0, 1e-12);
      EXPECT_NEAR((t.transpose() * n).norm(), 0.0, 1e-12);
      EXPECT_NEAR((tangent_basis(-n) - t).norm(), 0.0, 1e-12);
    }
  }
}

TEST(ModulationMatrix, EigenvectorsAreReferenceAndTangents) {
  std::mt19937_64 rng(5);
  for (int d = 2; d <= 4; ++d) {
    for (int k = 0; k < 30; ++k) {
      const Eigen::VectorXd n = random_unit(rng, d);
      Eigen::VectorXd r = random_unit(rng, d);
      if (r.dot(n) < 0.2) r = (r + 2.0 * n).normalized();
      const Eigen::MatrixXd m = modulation_matrix(r, n, 0.3, 1.7);
      EXPECT_NEAR((m * r - 0.3 * r).norm(), 0.0, 1e-10);
      const Eigen::MatrixXd t = tangent_basis(n);
      for (int j = 0; j < d - 1; ++j) {
        EXPECT_NEAR((m * t.col(j) - 1.7 * t.col(j)).norm(), 0.0, 1e-10);
      }
    }
  }
}

TEST(ModulationMatrix, TwoDimensionalFastPathMatchesGeneral) {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 200; ++k) {
    const Eigen::VectorXd n = random_unit(rng, 2);
    Eigen::VectorXd r = random_unit(rng, 2);
    if (r.dot(n) < 0.1) r = (r + 2.0 * n).normalized();
    const Eigen::VectorXd v = random_unit(rng, 2) * 1.3;
    const Eigen::VectorXd expected = modulation_matrix(r, n, 0.4, 1.2) * v;
    const Vec2 got = apply_modulation_2d(Vec2(r[0], r[1]), Vec2(n[0], n[1]), 0.4, 1.2, Vec2(v[0], v[1]));
    EXPECT_NEAR((got - Vec2(expected[0], expected[1])).norm(), 0.0, 1e-12);
  }
}

TEST(ModulationMatrix, IdentityEigenvaluesGiveIdentity) {
  const Vec2 v(0.3, -0.8);
  EXPECT_NEAR((apply_modulation_2d(Vec2(1, 0), Vec2(0.6, 0.8), 1.0, 1.0, v) - v).norm(), 0.0, 1e-15);
}
