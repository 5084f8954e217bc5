#include <gtest/gtest.h>

#include <random>

#include "fastmod/modulation_analytic.hpp"
#include "fastmod/simulator.hpp"
#include "oracles.hpp"

using namespace fastmod;

TEST(Weights, Examples) {
  const AgentConfig config;  // s = 2, D_scal = 1
  EXPECT_DOUBLE_EQ(raw_obstacle_weight(2.0, config), 1.0);
  EXPECT_DOUBLE_EQ(raw_obstacle_weight(3.0, config), 0.25);
  EXPECT_THROW(raw_obstacle_weight(1.0, config), Error);

  const ObstacleWeights one = normalize_weights({1.0});
  EXPECT_DOUBLE_EQ(one.normalized[0], 1.0);
  const ObstacleWeights two = normalize_weights({1.0, 1.0});
  EXPECT_DOUBLE_EQ(two.normalized[0], 0.5);
  EXPECT_DOUBLE_EQ(two.normalized[1], 0.5);
  EXPECT_DOUBLE_EQ(two.raw_sum, 2.0);
  const ObstacleWeights small = normalize_weights({0.25});
  EXPECT_DOUBLE_EQ(small.normalized[0], 0.25);
}

TEST(Weights, FromObstacles) {
  const AgentConfig config;
  const std::vector<StarObstacle> world{StarObstacle::circle({0, 0}, 1.0), StarObstacle::circle({6, 0}, 1.0)};
  const ObstacleWeights w = obstacle_weights(world, {3, 0}, config);
  EXPECT_NEAR(w.raw[0], 0.25, 1e-15);
  EXPECT_NEAR(w.raw[1], 0.25, 1e-15);
  EXPECT_NEAR(w.normalized[0], 0.25, 1e-15);
}

TEST(AveragedReference, Examples) {
  const std::vector<Vec2> opposite{{1, 0}, {-1, 0}};
  const std::vector<double> half{0.5, 0.5};
  EXPECT_NEAR(averaged_reference(half, opposite).norm(), 0.0, 1e-15);
  const std::vector<double> unit{1.0};
  const std::vector<Vec2> up{{0, 1}};
  EXPECT_TRUE(averaged_reference(unit, up).isApprox(Vec2(0, 1)));
  const std::vector<Vec2> corner{{1, 0}, {0, 1}};
  EXPECT_NEAR(averaged_reference(half, corner).norm(), std::sqrt(0.5), 1e-12);
}

TEST(SummedNormal, Examples) {
  const std::vector<double> w{0.5, 0.5};
  const std::vector<Vec2> r{{1, 0}, {0, 1}};
  const SummedNormal spheres = summed_normal(w, r, r, Vec2(1, 1).normalized());
  EXPECT_NEAR((spheres.normal - Vec2(1, 1).normalized()).norm(), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(spheres.scaling, 1.0);

  const SummedNormal a = summed_normal_from_offset({0, 0.5}, {1, 0});
  EXPECT_DOUBLE_EQ(a.scaling, 1.0);
  EXPECT_NEAR((a.unscaled - Vec2(1, 0.5)).norm(), 0.0, 1e-15);

  const SummedNormal b = summed_normal_from_offset({-0.9, 0}, {1, 0});
  // Offset antiparallel to the reference: alignment 1.
  EXPECT_NEAR(b.scaling, std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(b.unscaled.x(), std::sqrt(2.0) - 0.9, 1e-12);
  EXPECT_GT(b.unscaled.dot(Vec2(1, 0)), 0.0);

  // Alignment 0.9 above the switch.
  const Vec2 offset = 0.5 * Vec2(-0.9, std::sqrt(1.0 - 0.81));
  const SummedNormal c = summed_normal_from_offset(offset, {1, 0});
  EXPECT_NEAR(c.scaling, std::sqrt(2.0) * 0.9, 1e-12);
  EXPECT_NEAR((c.unscaled - (Vec2(std::sqrt(2.0) * 0.9, 0) + offset)).norm(), 0.0, 1e-12);
  EXPECT_GT(c.unscaled.x(), 0.0);
}

TEST(Eigenvalues, Examples) {
  EigenPair e = eigenvalues_analytic(0.0, 1.0);
  EXPECT_DOUBLE_EQ(e.reference, 1.0);
  EXPECT_DOUBLE_EQ(e.tangent, 1.0);
  e = eigenvalues_analytic(1.0, 1.0);
  EXPECT_DOUBLE_EQ(e.reference, 0.0);
  EXPECT_DOUBLE_EQ(e.tangent, 2.0);
  e = eigenvalues_analytic(0.5, 2.0);
  EXPECT_DOUBLE_EQ(e.reference, 0.75);
  EXPECT_DOUBLE_EQ(e.tangent, 1.25);
}

TEST(TailEigenvalues, Examples) {
  const EigenPair base{0.5, 1.5};
  // Moving toward the obstacle: unchanged.
  EigenPair t = tail_eigenvalues(base, {0.5, 0}, {1, 0}, {-1, 0}, 0.2);
  EXPECT_DOUBLE_EQ(t.reference, 0.5);
  EXPECT_DOUBLE_EQ(t.tangent, 1.5);
  // Moving straight away at surface-level magnitude: modulation disabled.
  t = tail_eigenvalues({0.0, 2.0}, {1, 0}, {1, 0}, {1, 0}, 0.2);
  EXPECT_DOUBLE_EQ(t.reference, 1.0);
  EXPECT_DOUBLE_EQ(t.tangent, 1.0);
  // Partial alignment.
  const Vec2 v(0.5, std::sqrt(0.75));
  t = tail_eigenvalues(base, {0.5, 0}, {1, 0}, v, 0.2);
  const double wv = std::pow(0.5, 0.2);
  EXPECT_NEAR(wv, 0.8706, 1e-4);
  EXPECT_NEAR(t.tangent, wv + (1 - wv) * 1.5, 1e-12);
  EXPECT_NEAR(t.reference, t.tangent, 1e-12);
}

TEST(DecreasingTailWeight, Examples) {
  std::vector<double> w{0.7};
  decreasing_tail_weight(w, std::vector<Vec2>{{0, 1}}, {1, 0});
  EXPECT_DOUBLE_EQ(w[0], 0.7);

  w = {0.4, 0.4};
  decreasing_tail_weight(w, std::vector<Vec2>{{1, 0}, {1, 0}}, {-1, 0});
  EXPECT_NEAR(w[0], 0.4 * std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(w[1], 0.4 * std::sqrt(0.5), 1e-12);

  w = {0.4, 0.4};
  decreasing_tail_weight(w, std::vector<Vec2>{{1, 0}, {1, 0}}, {1, 0});
  EXPECT_LT(w[0], 1e-100);
}

TEST(ModulateAnalytic, EmptyWorldIsIdentity) {
  const Vec2 v(1, 0);
  EXPECT_EQ(modulate_analytic({0, 0}, v, {}, AgentConfig{}), v);
}

TEST(ModulateAnalytic, FarFieldIsExactlyNominal) {
  const std::vector<StarObstacle> world{StarObstacle::circle({0, 0}, 1.0)};
  // Gamma = 1e7: raw weight 1e-14 < 1e-12.
  const Vec2 v(0.3, -0.4);
  EXPECT_EQ(modulate_analytic({1e7, 0}, v, world, AgentConfig{}), v);
}

TEST(ModulateAnalytic, HeadOnSaddleStopsAtSurface) {
  const std::vector<StarObstacle> world{StarObstacle::circle({0, 0}, 1.0)};
  const Vec2 x(1.0 + 1e-6, 0.0);
  const Vec2 v = modulate_analytic(x, {-1, 0}, world, AgentConfig{});
  EXPECT_LT(v.norm(), 1e-6);
}

TEST(ModulateAnalytic, ContinuousAcrossNormalizationSwitch) {
  // Single unit circle: raw weight (1/(Gamma-1))^2 crosses 1 at Gamma = 2.
  const std::vector<StarObstacle> world{StarObstacle::ellipse({0, 0}, 1.0, 0.6, 0.3)};
  const AnalyticOptions options{false, false};
  for (double a = 0.1; a < 2 * kPi; a += 0.7) {
    const Vec2 dir(std::cos(a), std::sin(a));
    const double boundary = world[0].ray_exit(dir).distance;
    const Vec2 x = 2.0 * boundary * dir;
    const Vec2 v(0.2, -1.0);
    const Vec2 lo = modulate_analytic(x - 1e-6 * dir, v, world, AgentConfig{}, options);
    const Vec2 hi = modulate_analytic(x + 1e-6 * dir, v, world, AgentConfig{}, options);
    EXPECT_LT((hi - lo).norm(), 1e-3);
  }
}

TEST(ModulateAnalytic, OffAxisApproachNeverEntersObstacle) {
  const std::vector<StarObstacle> world{StarObstacle::circle({0, 0}, 1.0)};
  const AgentConfig config;
  Vec2 x(-4.0, 0.05);
  const Vec2 attractor(4.0, 0.0);
  const double dt = 1e-3;
  double min_gamma = 1e9;
  const auto f = [&](const Vec2& p) {
    Vec2 v = attractor - p;
    if (v.norm() > 1.0) v.normalize();
    return modulate_analytic(p, v, world, config);
  };
  for (int i = 0; i < 10000; ++i) {
    const Vec2 k1 = f(x);
    const Vec2 k2 = f(x + 0.5 * dt * k1);
    const Vec2 k3 = f(x + 0.5 * dt * k2);
    const Vec2 k4 = f(x + dt * k3);
    x += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    min_gamma = std::min(min_gamma, gamma(world[0], x));
    const Vec2 n = surface_normal(world[0], x);
    if (gamma(world[0], x) < 1.01) EXPECT_GE(n.dot(f(x)), -1e-9);
  }
  EXPECT_GE(min_gamma, 1.0);
}

TEST(ModulateAnalytic, InvertibilityOnRandomWorlds) {
  std::mt19937_64 rng(21);
  const AgentConfig config;
  RandomWorldSpec spec;
  spec.max_obstacles = 20;
  int evaluated = 0;
  for (int k = 0; k < 1000; ++k) {
    const std::vector<StarObstacle> world = random_star_world(rng, spec, {}, 0.0);
    const Vec2 x(oracle::uniform(rng, -4.5, 4.5), oracle::uniform(rng, -4.5, 4.5));
    bool exterior = true;
    for (const StarObstacle& o : world) exterior = exterior && gamma(o, x) > 1.0;
    if (!exterior) continue;
    const auto frame = analytic_frame(x, {1, 0}, world, config);
    if (!frame) continue;
    ++evaluated;
    EXPECT_GT(frame->reference.dot(frame->normal.unscaled), 0.0);
    EXPECT_LE(frame->averaged_reference.norm(), 1.0 + 1e-12);
  }
  EXPECT_GT(evaluated, 500);
}

TEST(ModulateAnalytic, StationaryPointsOnlyOnSurfaces) {
  std::mt19937_64 rng(33);
  const AgentConfig config;
  for (int k = 0; k < 2000; ++k) {
    const std::vector<StarObstacle> world{
        random_star_obstacle(rng, {oracle::uniform(rng, -2, 2), oracle::uniform(rng, -2, 2)}, 0.3, 1.0),
        random_star_obstacle(rng, {oracle::uniform(rng, -2, 2), oracle::uniform(rng, -2, 2)}, 0.3, 1.0)};
    const Vec2 x(oracle::uniform(rng, -4, 4), oracle::uniform(rng, -4, 4));
    double min_gamma = 1e9;
    for (const StarObstacle& o : world) min_gamma = std::min(min_gamma, gamma(o, x));
    if (min_gamma <= 1.0) continue;
    const Vec2 v = Vec2(4, 0) - x;
    if (v.norm() < 1e-3) continue;
    if (modulate_analytic(x, v, world, config).norm() < 1e-8) EXPECT_LE(min_gamma, 1.0 + 1e-3);
  }
}
