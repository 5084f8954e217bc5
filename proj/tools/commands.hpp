#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fastmod::cli {

inline constexpr int kExitConverged = 0;
inline constexpr int kExitLocalMinimum = 2;
inline constexpr int kExitCollision = 3;
inline constexpr int kExitTimeout = 4;
inline constexpr int kExitMalformed = 64;
inline constexpr int kExitFailure = 70;

/// Flags shared by the scenario commands.
struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<std::string> mode;  // analytic | sampled | mixed
  std::optional<std::string> tail;  // on | off
  std::string out = "fastmod-out";
  bool json = false;
};

struct FieldArgs {
  std::string scenario;
  std::vector<double> bounds;  // x_min y_min x_max y_max
  std::vector<std::size_t> resolution{41, 41};
};

struct ReplayArgs {
  std::string scans;  // scan CSV or directory of them
  std::vector<double> attractor;
  std::vector<double> velocity;
  std::vector<double> start;  // x y theta; default: first sensor pose
  double duration = 30.0;
  double radius = 0.45;
};

struct ExperimentArgs {
  std::size_t runs = 100;
  unsigned threads = 0;  // 0: hardware concurrency
  double scan_delta = 0.0;  // 0: experiment default
};

struct BenchArgs {
  std::vector<std::size_t> sizes;
  std::size_t repetitions = 0;  // 0: default
};

struct ServeArgs {
  std::string scenario;
  std::uint16_t port = 8765;
  std::string bind = "127.0.0.1";
  double time_scale = 1.0;
  double frame_rate = 30.0;
};

int run(const std::string& scenario, const Common& common);
int field(const FieldArgs& args, const Common& common);
int replay(const ReplayArgs& args, const Common& common);
int experiment(const ExperimentArgs& args, const Common& common);
int bench(const BenchArgs& args, const Common& common);
int serve(const ServeArgs& args, const Common& common);

}  // namespace fastmod::cli
