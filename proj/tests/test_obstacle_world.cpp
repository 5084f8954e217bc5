#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "fastmod/obstacle_world.hpp"
#include "oracles.hpp"

using namespace fastmod;

TEST(Gamma, CircleRayScaling) {
  const StarObstacle c = StarObstacle::circle({0, 0}, 1.0);
  EXPECT_DOUBLE_EQ(gamma(c, {2, 0}), 2.0);
  EXPECT_DOUBLE_EQ(gamma(c, {1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(gamma(c, {0, -3}), 3.0);
}

TEST(Gamma, EllipseMatchesBisectionOracle) {
  const StarObstacle e = StarObstacle::ellipse({0, 0}, 2.0, 1.0);
  EXPECT_NEAR(gamma(e, {4, 0}), 2.0, 1e-12);

  std::mt19937_64 rng(7);
  for (int k = 0; k < 200; ++k) {
    const Vec2 c(oracle::uniform(rng, -3, 3), oracle::uniform(rng, -3, 3));
    const double a = oracle::uniform(rng, 0.3, 2.0);
    const double b = oracle::uniform(rng, 0.3, 2.0);
    const double phi = oracle::uniform(rng, 0, kPi);
    const StarObstacle obs = StarObstacle::ellipse(c, a, b, phi);
    const auto f = oracle::ellipse(c, a, b, phi);
    const double ang = oracle::uniform(rng, -kPi, kPi);
    const Vec2 dir(std::cos(ang), std::sin(ang));
    const double boundary = oracle::ray_exit(f, c, dir);
    const Vec2 x = c + oracle::uniform(rng, 1.01, 4.0) * boundary * dir;
    EXPECT_NEAR(gamma(obs, x), (x - c).norm() / boundary, 1e-6);
    EXPECT_NEAR((surface_normal(obs, x) - oracle::normal(f, c + boundary * dir)).norm(), 0.0, 1e-6);
  }
}

TEST(Gamma, PolygonMatchesBisectionOracle) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 200; ++k) {
    // Random convex polygon: sorted angles on a circle of random radii.
    const int n = 3 + static_cast<int>(rng() % 5);
    std::vector<double> angles;
    for (int i = 0; i < n; ++i) angles.push_back(oracle::uniform(rng, 0, 2 * kPi));
    std::sort(angles.begin(), angles.end());
    std::vector<Vec2> body;
    const double r = oracle::uniform(rng, 0.5, 1.5);
    for (double a : angles) body.emplace_back(r * std::cos(a), r * std::sin(a));
    const Vec2 centroid = std::accumulate(body.begin(), body.end(), Vec2(Vec2::Zero())) / n;
    bool degenerate = false;
    for (int i = 0; i < n; ++i) {
      degenerate = degenerate || cross(body[(i + 1) % n] - body[i], centroid - body[i]) < 1e-3;
    }
    if (degenerate) continue;
    for (Vec2& v : body) v -= centroid;
    const Vec2 c(oracle::uniform(rng, -2, 2), oracle::uniform(rng, -2, 2));
    const StarObstacle obs = StarObstacle::polygon(c, body);
    std::vector<Vec2> world;
    for (const Vec2& v : body) world.push_back(c + v);
    const auto f = oracle::polygon(world);
    const double ang = oracle::uniform(rng, -kPi, kPi);
    const Vec2 dir(std::cos(ang), std::sin(ang));
    const double boundary = oracle::ray_exit(f, c, dir);
    const Vec2 x = c + oracle::uniform(rng, 1.01, 3.0) * boundary * dir;
    EXPECT_NEAR(gamma(obs, x), (x - c).norm() / boundary, 1e-6);
  }
}

TEST(Gamma, ReferencePointIsSingular) {
  const StarObstacle c = StarObstacle::circle({1, 1}, 1.0);
  try {
    gamma(c, {1, 1});
    FAIL() << "expected gamma-singularity";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kGammaSingularity);
  }
}

TEST(Gamma, MarginOffsetsTheSurface) {
  const StarObstacle c = StarObstacle::circle({0, 0}, 1.0, 0.5);
  EXPECT_NEAR(gamma(c, {1.5, 0}), 1.0, 1e-12);
  EXPECT_NEAR(c.signed_distance({3, 0}), 1.5, 1e-12);
  const StarObstacle box = StarObstacle::box({0, 0}, 2.0, 2.0, 0.0, 0.25);
  EXPECT_NEAR(box.signed_distance({2, 0}), 0.75, 1e-12);
  EXPECT_NEAR(gamma(box, {1.25, 0}), 1.0, 1e-12);
}

TEST(ReferenceDirection, PointsFromReferenceToAgent) {
  const StarObstacle c = StarObstacle::circle({0, 0}, 0.5);
  EXPECT_TRUE(reference_direction_analytic(c, {3, 0}).isApprox(Vec2(1, 0)));
  const StarObstacle s(Circle{0.5}, {1, 1});
  EXPECT_TRUE(reference_direction_analytic(s, {1, 5}).isApprox(Vec2(0, 1)));
  const StarObstacle o = StarObstacle::circle({0, 0}, 0.5);
  EXPECT_TRUE(reference_direction_analytic(o, {1, 1}).isApprox(Vec2(std::sqrt(0.5), std::sqrt(0.5))));
}

TEST(SurfaceNormal, Examples) {
  const StarObstacle c = StarObstacle::circle({0, 0}, 1.0);
  for (double a = 0; a < 2 * kPi; a += 0.3) {
    const Vec2 x = 2.5 * Vec2(std::cos(a), std::sin(a));
    EXPECT_NEAR((surface_normal(c, x) - reference_direction_analytic(c, x)).norm(), 0.0, 1e-12);
  }
  const StarObstacle box = StarObstacle::box({0, 0}, 2.0, 2.0);
  EXPECT_NEAR((surface_normal(box, {3, 0}) - Vec2(1, 0)).norm(), 0.0, 1e-12);
  const StarObstacle e = StarObstacle::ellipse({0, 0}, 2.0, 1.0);
  EXPECT_NEAR((surface_normal(e, {0, 3}) - Vec2(0, 1)).norm(), 0.0, 1e-12);
  try {
    surface_normal(c, {0.5, 0});
    FAIL() << "expected inside-obstacle";
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::kInsideObstacle);
  }
}

TEST(Classify, Regions) {
  AgentConfig config;
  config.radius = 0.4;
  config.gap_distance = 0.1;
  EXPECT_EQ(classify({}, {3, 3}, config), GammaRegion::kMarginExterior);
  const std::vector<StarObstacle> world{StarObstacle::circle({0, 0}, 1.0)};
  EXPECT_EQ(classify(world, {0.5, 0}, config), GammaRegion::kInterior);
  EXPECT_EQ(classify(world, {1.6, 0}, config), GammaRegion::kMarginExterior);
  EXPECT_EQ(classify(world, {1.3, 0}, config), GammaRegion::kExterior);
  EXPECT_EQ(classify(world, {1.0, 0}, config), GammaRegion::kBoundary);
}

class RandomObstacle : public ::testing::TestWithParam<int> {};

TEST_P(RandomObstacle, GammaExceedsOneAndGrowsAlongRays) {
  std::mt19937_64 rng(1000 + GetParam());
  const StarObstacle obs = [&] {
    const Vec2 c(oracle::uniform(rng, -1, 1), oracle::uniform(rng, -1, 1));
    switch (GetParam() % 3) {
      case 0: return StarObstacle::ellipse(c, oracle::uniform(rng, 0.2, 1.5), oracle::uniform(rng, 0.2, 1.5),
                                           oracle::uniform(rng, 0, kPi));
      case 1: return StarObstacle::circle(c, oracle::uniform(rng, 0.2, 1.5), oracle::uniform(rng, 0, 0.3));
      default: return StarObstacle::box(c, oracle::uniform(rng, 0.2, 2), oracle::uniform(rng, 0.2, 2),
                                        oracle::uniform(rng, 0, kPi));
    }
  }();
  const Vec2 ref = obs.reference_point();
  for (int i = 0; i < 1000; ++i) {
    const double a = oracle::uniform(rng, -kPi, kPi);
    const Vec2 dir(std::cos(a), std::sin(a));
    const double boundary = obs.ray_exit(dir).distance;
    const Vec2 x = ref + boundary * oracle::uniform(rng, 1.0001, 5.0) * dir;
    EXPECT_GT(gamma(obs, x), 1.0);
    if (i % 100 == 0) {
      double previous = 0.0;
      for (int k = 1; k <= 10; ++k) {
        const double g = gamma(obs, ref + 0.5 * k * boundary * dir);
        EXPECT_GT(g, previous);
        previous = g;
      }
    }
  }
  // Star-shape condition on 360 boundary samples.
  for (int i = 0; i < 360; ++i) {
    const double a = 2 * kPi * i / 360.0;
    const Vec2 dir(std::cos(a), std::sin(a));
    const auto hit = obs.ray_exit(dir);
    EXPECT_GT(dir.dot(hit.normal), 0.0);
  }
}

INSTANTIATE_TEST_SUITE_P(Shapes, RandomObstacle, ::testing::Range(0, 12));

TEST(StarObstacle, RejectsReferenceOutside) {
  EXPECT_THROW(StarObstacle(Circle{1.0}, {0, 0}, 0.0, Vec2(2, 0)), Error);
}

TEST(StarObstacle, AdvancedMovesRigidly) {
  const StarObstacle c = StarObstacle::circle({0, 0}, 1.0).with_velocity({1, 2}, 0.0);
  const StarObstacle moved = c.advanced(0.5);
  EXPECT_TRUE(moved.center().isApprox(Vec2(0.5, 1.0)));
  const StarObstacle spinning = StarObstacle::circle({1, 0}, 0.5).with_velocity({0, 0}, 2.0);
  EXPECT_TRUE(spinning.velocity_at({1, 1}).isApprox(Vec2(-2, 0)));
}

TEST(AgentConfig, ValidateRejectsNonPositive) {
  AgentConfig c;
  EXPECT_NO_THROW(c.validate());
  c.radius = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = AgentConfig{};
  c.reactivity = -1.0;
  EXPECT_THROW(c.validate(), Error);
}
