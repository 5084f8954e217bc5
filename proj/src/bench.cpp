#include "fastmod/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace fastmod {

Vec2 baseline_modulate(const Vec2& x, const Vec2& nominal, std::span<const StarObstacle> obstacles,
                       const AgentConfig& config, const AnalyticOptions& options) {
  const double speed = nominal.norm();
  if (obstacles.empty() || speed == 0.0) return nominal;
  const double base_angle = std::atan2(nominal.y(), nominal.x());

  double weight_sum = 0.0;
  double magnitude = 0.0;
  double angle = 0.0;
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const double w = raw_obstacle_weight(gamma(obstacles[i], x), config);
    if (w <= kWeightEpsilon) continue;
    const Vec2 v = modulate_analytic(x, nominal, obstacles.subspan(i, 1), config, options);
    const double norm = v.norm();
    weight_sum += w;
    magnitude += w * norm;
    // Direction relative to the nominal, so that opposite deflections do not cancel.
    if (norm > 0.0) angle += w * wrap_angle(std::atan2(v.y(), v.x()) - base_angle);
  }
  if (weight_sum == 0.0) return nominal;
  magnitude /= weight_sum;
  angle /= weight_sum;
  return magnitude * Vec2(std::cos(base_angle + angle), std::sin(base_angle + angle));
}

std::string_view bench_path_name(BenchPath path) {
  switch (path) {
    case BenchPath::kSampled: return "sampled";
    case BenchPath::kFastAnalytic: return "fast-analytic";
    case BenchPath::kBaselineAnalytic: return "baseline-analytic";
  }
  return "unknown";
}

LinearFit fit_line(std::span<const double> xs, std::span<const double> ys) {
  LinearFit fit;
  const std::size_t n = std::min(xs.size(), ys.size());
  if (n < 2) return fit;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

const BenchSeries* BenchReport::find(BenchPath path) const {
  for (const BenchSeries& s : series) {
    if (s.path == path) return &s;
  }
  return nullptr;
}

ScanPointSet bench_scan(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  std::uniform_real_distribution<double> range(1.0, 8.0);
  ScanPointSet scan;
  scan.sampling_angle = 2.0 * kPi / static_cast<double>(std::max<std::size_t>(n, 1));
  scan.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = angle(rng);
    scan.points.emplace_back(range(rng) * std::cos(a), range(rng) * std::sin(a));
  }
  return scan;
}

std::vector<StarObstacle> bench_obstacles(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  std::uniform_real_distribution<double> range(2.0, 20.0);
  std::uniform_real_distribution<double> size(0.1, 0.5);
  std::vector<StarObstacle> obstacles;
  obstacles.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = angle(rng);
    const double r = range(rng);
    obstacles.push_back(StarObstacle::circle({r * std::cos(a), r * std::sin(a)}, size(rng)));
  }
  return obstacles;
}

namespace {

double percentile(std::vector<double> samples, double q) {
  std::sort(samples.begin(), samples.end());
  const double pos = q * static_cast<double>(samples.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, samples.size() - 1);
  return samples[lo] + (pos - static_cast<double>(lo)) * (samples[hi] - samples[lo]);
}

template <typename F>
BenchPoint time_call(std::size_t n, const BenchOptions& options, F&& call) {
  // Repeatability check doubles as a use of the result.
  const Vec2 reference = call();
  if (!(call() == reference)) throw std::runtime_error("benchmark call is not repeatable");
  for (std::size_t i = 0; i < options.warmup; ++i) call();
  std::vector<double> samples;
  samples.reserve(options.repetitions);
  volatile double sink = 0.0;
  for (std::size_t i = 0; i < options.repetitions; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const Vec2 v = call();
    const auto t1 = std::chrono::steady_clock::now();
    sink = sink + v.x();
    samples.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  BenchPoint p;
  p.n = n;
  p.repetitions = samples.size();
  p.median_ms = percentile(samples, 0.5);
  p.p95_ms = percentile(samples, 0.95);
  return p;
}

}  // namespace

BenchReport run_benchmarks(const BenchOptions& options) {
  BenchReport report;
  const AgentConfig config;
  const Vec2 x = Vec2::Zero();
  const Vec2 nominal(1.0, 0.3);
  for (BenchPath path : options.paths) {
    BenchSeries series;
    series.path = path;
    for (std::size_t n : options.sizes) {
      if (path == BenchPath::kSampled) {
        const ScanPointSet scan = bench_scan(n, options.seed);
        series.points.push_back(
            time_call(n, options, [&] { return modulate_sampled(x, nominal, scan, config); }));
      } else {
        const std::vector<StarObstacle> obstacles = bench_obstacles(n, options.seed);
        const AnalyticOptions analytic;
        if (path == BenchPath::kFastAnalytic) {
          series.points.push_back(time_call(
              n, options, [&] { return modulate_analytic(x, nominal, obstacles, config, analytic); }));
        } else {
          series.points.push_back(time_call(
              n, options, [&] { return baseline_modulate(x, nominal, obstacles, config, analytic); }));
        }
      }
    }
    std::vector<double> xs, ys;
    for (const BenchPoint& p : series.points) {
      xs.push_back(static_cast<double>(p.n));
      ys.push_back(p.median_ms);
    }
    series.fit = fit_line(xs, ys);
    report.series.push_back(std::move(series));
  }
  return report;
}

void write_bench_csv(std::ostream& out, const BenchReport& report) {
  out << "path,n,median_ms,p95_ms,repetitions\n";
  for (const BenchSeries& s : report.series) {
    for (const BenchPoint& p : s.points) {
      out << bench_path_name(s.path) << ',' << p.n << ',' << p.median_ms << ',' << p.p95_ms << ','
          << p.repetitions << '\n';
    }
  }
}

std::string format_bench_table(const BenchReport& report) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-18s %8s %12s %12s\n", "path", "n", "median [ms]", "p95 [ms]");
  os << line;
  for (const BenchSeries& s : report.series) {
    for (const BenchPoint& p : s.points) {
      std::snprintf(line, sizeof line, "%-18s %8zu %12.4f %12.4f\n",
                    std::string(bench_path_name(s.path)).c_str(), p.n, p.median_ms, p.p95_ms);
      os << line;
    }
    std::snprintf(line, sizeof line, "%-18s slope %.3e ms/elem  R^2 %.4f\n",
                  std::string(bench_path_name(s.path)).c_str(), s.fit.slope, s.fit.r_squared);
    os << line;
  }
  return os.str();
}

std::string bench_to_json(const BenchReport& report) {
  nlohmann::json j = nlohmann::json::array();
  for (const BenchSeries& s : report.series) {
    nlohmann::json points = nlohmann::json::array();
    for (const BenchPoint& p : s.points) {
      points.push_back({{"n", p.n}, {"median_ms", p.median_ms}, {"p95_ms", p.p95_ms},
                        {"repetitions", p.repetitions}});
    }
    j.push_back({{"path", bench_path_name(s.path)},
                 {"points", std::move(points)},
                 {"slope_ms_per_element", s.fit.slope},
                 {"intercept_ms", s.fit.intercept},
                 {"r_squared", s.fit.r_squared}});
  }
  return j.dump(2);
}

}  // namespace fastmod
