#include <gtest/gtest.h>

#include <random>

#include "fastmod/fusion.hpp"
#include "fastmod/simulator.hpp"
#include "oracles.hpp"

using namespace fastmod;

namespace {

double angle_between(const Vec2& a, const Vec2& b) {
  return std::abs(std::atan2(cross(a, b), a.dot(b)));
}

}  // namespace

TEST(Prune, DropsCoveredPointsInclusive) {
  const std::vector<StarObstacle> world{StarObstacle::ellipse({0, 0}, 2.0, 1.0)};
  ScanPointSet scan;
  scan.points = {{1.6, 0}, {2.4, 0}, {2.0, 0}, {0, 1.0}, {0, 1.5}};
  const ScanPointSet kept = prune_points(scan, world);
  ASSERT_EQ(kept.points.size(), 2u);
  EXPECT_EQ(kept.points[0], Vec2(2.4, 0));
  EXPECT_EQ(kept.points[1], Vec2(0, 1.5));
  EXPECT_EQ(prune_points(kept, world).points, kept.points);
  EXPECT_TRUE(is_covered_by_obstacle({2.0, 0}, world));
}

TEST(FusionWeights, Examples) {
  FusionWeights w = fusion_weights(0.5, 0.5);
  EXPECT_DOUBLE_EQ(w.sampled, 0.5);
  EXPECT_DOUBLE_EQ(w.analytic, 0.5);
  w = fusion_weights(0.0, 0.5);
  EXPECT_DOUBLE_EQ(w.sampled, 0.0);
  EXPECT_DOUBLE_EQ(w.analytic, 1.0);
  w = fusion_weights(1.5, 0.5);
  EXPECT_DOUBLE_EQ(w.sampled, 1.0);
  EXPECT_DOUBLE_EQ(w.analytic, 0.0);
  w = fusion_weights(0.0, 0.0);
  EXPECT_FALSE(w.has_information());
  EXPECT_EQ(w.sampled, 0.0);
  EXPECT_EQ(w.analytic, 0.0);
}

TEST(FusionWeights, SumToOneWithInformation) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 10000; ++i) {
    const double p = oracle::uniform(rng, 0, 3);
    const double o = oracle::uniform(rng, 0, 3);
    const FusionWeights w = fusion_weights(p, o);
    EXPECT_NEAR(w.sampled + w.analytic, 1.0, 1e-12);
    EXPECT_GE(w.sampled, 0.0);
    EXPECT_GE(w.analytic, 0.0);
  }
}

TEST(MixedReference, Examples) {
  const Vec2 rp(0.3, 0.4);
  const Vec2 ro(-0.1, 0.2);
  EXPECT_EQ(mixed_reference({1.0, 0.0}, rp, ro), rp);
  EXPECT_EQ(mixed_reference({0.0, 1.0}, rp, ro), -ro);
  EXPECT_NEAR(mixed_reference({0.5, 0.5}, Vec2(0.4, 0), Vec2(0.4, 0)).norm(), 0.0, 1e-15);
}

TEST(ImportanceScaling, Examples) {
  EXPECT_NEAR(importance_scaling(7e-3, 2), 897.6, 0.05);
  EXPECT_NEAR(importance_scaling(2 * kPi / 360, 2), 360.0, 1e-9);
  EXPECT_NEAR(importance_scaling(0.1, 3), 2 * kPi / 0.01, 1e-9);
}

TEST(ModulateMixed, AnalyticOnlyDeflectsLikeAnalyticPath) {
  const std::vector<StarObstacle> world{StarObstacle::ellipse({0, 0}, 1.5, 0.7, 0.4)};
  const AgentConfig config;
  const ScanPointSet empty;
  int compared = 0;
  for (double a = 0; a < 2 * kPi; a += 0.25) {
    const Vec2 dir(std::cos(a), std::sin(a));
    const Vec2 x = 1.4 * world[0].ray_exit(dir).distance * dir;
    const Vec2 v(1, 0.2);
    const Vec2 analytic = modulate_analytic(x, v, world, config, AnalyticOptions{false, false});
    const Vec2 mixed = modulate_mixed(x, v, empty, world, config, MixedOptions{false, true});
    const double deflection = angle_between(v, analytic);
    if (deflection < 0.1) continue;
    ++compared;
    EXPECT_LT(angle_between(analytic, mixed), 0.05 * kPi) << "at angle " << a;
  }
  EXPECT_GT(compared, 5);
}

TEST(ModulateMixed, StaticObstaclesReduceToStaticModulation) {
  std::mt19937_64 rng(6);
  const AgentConfig config;
  for (int k = 0; k < 200; ++k) {
    const std::vector<StarObstacle> world{
        random_star_obstacle(rng, {oracle::uniform(rng, -2, 2), oracle::uniform(rng, -2, 2)}, 0.3, 1.0)};
    ScanPointSet scan;
    for (int i = 0; i < 50; ++i) scan.points.emplace_back(oracle::uniform(rng, 2, 4), oracle::uniform(rng, -4, 4));
    const Vec2 x(oracle::uniform(rng, -4, -3), oracle::uniform(rng, -4, 4));
    if (gamma(world[0], x) <= 1.0) continue;
    const Vec2 v(1, 0.3);
    const MixedFrame frame = mixed_frame(x, v, scan, world, config);
    const Vec2 expected = apply_mixed_matrix(frame, v);
    EXPECT_NEAR((modulate_mixed(x, v, scan, world, config) - expected).norm(), 0.0, 1e-12);
  }
}

TEST(ModulateMixed, FarFieldIgnoresObstacleVelocity) {
  const std::vector<StarObstacle> world{StarObstacle::circle({0, 0}, 1.0).with_velocity({3, 1}, 0.5)};
  const Vec2 v(0.4, 0.1);
  EXPECT_EQ(modulate_mixed({1e7, 0}, v, ScanPointSet{}, world, AgentConfig{}), v);
}

TEST(ModulateMixed, RestingAgentIsPushedAwayByApproachingObstacle) {
  const std::vector<StarObstacle> world{StarObstacle::circle({0, 0}, 1.0).with_velocity({1, 0}, 0.0)};
  const Vec2 x(1.3, 0.1);
  const Vec2 v = modulate_mixed(x, Vec2::Zero(), ScanPointSet{}, world, AgentConfig{});
  EXPECT_GT(v.dot(reference_direction_analytic(world[0], x)), 0.0);
}

TEST(ModulateMixed, HandOverFromPointsToAnalyticIsSmooth) {
  // Scan of a circle, then the same circle described analytically with its points pruned.
  AgentConfig config;
  const StarObstacle circle = StarObstacle::circle({0, 0}, 1.0);
  const std::vector<WorldObstacle> world{{circle, true}};
  ScanSpec spec;
  spec.sampling_angle = 0.01;
  int compared = 0;
  for (double a = 0.0; a < 2 * kPi; a += 0.5) {
    for (double gap : {0.1, 0.3, 0.6, 1.0}) {
      const Vec2 x = (1.0 + config.radius + gap) * Vec2(std::cos(a), std::sin(a));
      const ScanPointSet scan = synthesize_scan(world, Pose{x.x(), x.y(), 0.0}, spec, 0.0);
      const Vec2 v = (Vec2(0, 0) - x).normalized() + Vec2(0.3, -0.2);
      const Vec2 before = modulate_mixed(x, v, scan, {}, config);
      const std::vector<StarObstacle> tracked{circle.inflated(config.radius)};
      const ScanPointSet kept = prune_points(scan, std::vector<StarObstacle>{circle});
      EXPECT_TRUE(kept.points.empty());
      const Vec2 after = modulate_mixed(x, v, kept, tracked, config, MixedOptions{true, false});
      EXPECT_LT(std::abs(after.norm() - before.norm()), 0.1 * before.norm())
          << "at " << x.transpose() << ": " << before.transpose() << " -> " << after.transpose();
      ++compared;
    }
  }
  EXPECT_GT(compared, 0);
}
