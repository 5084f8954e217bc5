#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fastmod/modulation_analytic.hpp"
#include "fastmod/modulation_sampled.hpp"

namespace fastmod {

/// Per-obstacle modulation (one modulation matrix per obstacle), combined by
/// averaging magnitudes and directions of the modulated velocities separately.
/// Reference for the complexity comparison only.
Vec2 baseline_modulate(const Vec2& x, const Vec2& nominal, std::span<const StarObstacle> obstacles,
                       const AgentConfig& config, const AnalyticOptions& options = {});

enum class BenchPath { kSampled, kFastAnalytic, kBaselineAnalytic };

std::string_view bench_path_name(BenchPath path);

struct BenchPoint {
  std::size_t n = 0;
  double median_ms = 0.0;
  double p95_ms = 0.0;
  std::size_t repetitions = 0;
};

/// Least-squares line time = slope * n + intercept over the medians.
struct LinearFit {
  double slope = 0.0;      // ms per element
  double intercept = 0.0;  // ms
  double r_squared = 0.0;
};

LinearFit fit_line(std::span<const double> xs, std::span<const double> ys);

struct BenchSeries {
  BenchPath path = BenchPath::kSampled;
  std::vector<BenchPoint> points;
  LinearFit fit;
};

struct BenchOptions {
  std::vector<std::size_t> sizes{10, 100, 1000, 10000, 30000};
  std::size_t repetitions = 41;
  std::size_t warmup = 3;
  std::uint64_t seed = 1;
  std::vector<BenchPath> paths{BenchPath::kSampled, BenchPath::kFastAnalytic,
                               BenchPath::kBaselineAnalytic};
};

struct BenchReport {
  std::vector<BenchSeries> series;

  const BenchSeries* find(BenchPath path) const;
};

/// Fixed-seed scenes: `n` scan points around the agent, or `n` circular obstacles.
ScanPointSet bench_scan(std::size_t n, std::uint64_t seed);
std::vector<StarObstacle> bench_obstacles(std::size_t n, std::uint64_t seed);

/// Times only the modulation call. Each scene is checked for repeatable
/// output before timing.
BenchReport run_benchmarks(const BenchOptions& options = {});

void write_bench_csv(std::ostream& out, const BenchReport& report);
std::string format_bench_table(const BenchReport& report);
std::string bench_to_json(const BenchReport& report);

}  // namespace fastmod
