#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "fastmod/bench.hpp"
#include "fastmod/simulator.hpp"
#include "oracles.hpp"

using namespace fastmod;

TEST(Baseline, SingleObstacleMatchesFastPath) {
  std::mt19937_64 rng(4);
  const AgentConfig config;
  int compared = 0;
  for (int k = 0; k < 200; ++k) {
    const std::vector<StarObstacle> obs{random_star_obstacle(rng, Vec2::Zero(), 0.4, 1.2)};
    const Vec2 x(oracle::uniform(rng, -4, 4), oracle::uniform(rng, -4, 4));
    if (obs[0].signed_distance(x) < 0.05 + config.radius) continue;
    const Vec2 v(oracle::uniform(rng, -1, 1), oracle::uniform(rng, -1, 1));
    const Vec2 fast = modulate_analytic(x, v, obs, config);
    const Vec2 base = baseline_modulate(x, v, obs, config);
    EXPECT_NEAR((fast - base).norm(), 0.0, 1e-9) << "case " << k;
    ++compared;
  }
  EXPECT_GT(compared, 50);
}

TEST(Baseline, EmptyWorldIsIdentity) {
  const Vec2 v(0.3, -0.7);
  EXPECT_EQ(baseline_modulate({1, 2}, v, {}, AgentConfig{}), v);
  EXPECT_EQ(baseline_modulate({1, 2}, Vec2::Zero(), bench_obstacles(5, 1), AgentConfig{}), Vec2::Zero());
}

TEST(FitLine, ExactLine) {
  const std::vector<double> xs{1, 2, 3, 10};
  std::vector<double> ys;
  for (double x : xs) ys.push_back(0.25 * x - 3.0);
  const LinearFit fit = fit_line(xs, ys);
  EXPECT_NEAR(fit.slope, 0.25, 1e-12);
  EXPECT_NEAR(fit.intercept, -3.0, 1e-12);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
}

TEST(FitLine, NoisyLineHasLowerRSquared) {
  const std::vector<double> xs{0, 1, 2, 3};
  const std::vector<double> ys{0, 2, 1, 3};
  const LinearFit fit = fit_line(xs, ys);
  EXPECT_NEAR(fit.slope, 0.8, 1e-12);
  EXPECT_NEAR(fit.r_squared, 0.64, 1e-12);
}

TEST(BenchScenes, SizesAndDeterminism) {
  EXPECT_EQ(bench_scan(123, 5).points.size(), 123u);
  EXPECT_EQ(bench_scan(10, 5).points, bench_scan(10, 5).points);
  const auto a = bench_obstacles(7, 3);
  EXPECT_EQ(a.size(), 7u);
  for (const StarObstacle& o : a) EXPECT_GT(o.signed_distance(Vec2::Zero()), AgentConfig{}.radius);
}

TEST(RunBenchmarks, SmallReport) {
  BenchOptions options;
  options.sizes = {10, 20};
  options.repetitions = 3;
  options.warmup = 1;
  const BenchReport report = run_benchmarks(options);
  ASSERT_EQ(report.series.size(), 3u);
  for (const BenchSeries& s : report.series) {
    ASSERT_EQ(s.points.size(), 2u);
    for (const BenchPoint& p : s.points) {
      EXPECT_GE(p.median_ms, 0.0);
      EXPECT_GE(p.p95_ms, p.median_ms);
      EXPECT_EQ(p.repetitions, 3u);
    }
  }
  ASSERT_NE(report.find(BenchPath::kSampled), nullptr);
  std::ostringstream csv;
  write_bench_csv(csv, report);
  EXPECT_EQ(csv.str().rfind("path,n,median_ms,p95_ms,repetitions\n", 0), 0u);
  EXPECT_NE(format_bench_table(report).find("fast-analytic"), std::string::npos);
}
