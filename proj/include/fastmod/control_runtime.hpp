#pragma once

#include <array>
#include <cstddef>
#include <mutex>
#include <optional>
#include <vector>

#include "fastmod/fusion.hpp"

namespace fastmod {

enum class AvoidanceMode { kAnalytic, kSampled, kMixed };

struct StalenessLimits {
  double scan = 0.25;       // s
  double obstacles = 2.0;   // s
  double nominal = 0.25;    // s
};

enum class PushStatus { kAccepted, kStaleWrite };

struct PushAck {
  PushStatus status = PushStatus::kAccepted;
  double timestamp = 0.0;

  bool accepted() const { return status == PushStatus::kAccepted; }
};

template <typename T>
struct Stamped {
  T value;
  double timestamp = 0.0;
};

/// Latest-value register with a short history, so a reader at time t can
/// retrieve the newest payload stamped at or before t. Writes with a
/// timestamp older than the newest stored one are rejected.
template <typename T, std::size_t Depth = 16>
class LatestValue {
 public:
  PushAck push(T value, double timestamp) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (count_ > 0 && timestamp < slots_[newest_].timestamp) {
      return {PushStatus::kStaleWrite, timestamp};
    }
    newest_ = count_ == 0 ? 0 : (newest_ + 1) % Depth;
    slots_[newest_] = Stamped<T>{std::move(value), timestamp};
    if (count_ < Depth) ++count_;
    return {PushStatus::kAccepted, timestamp};
  }

  /// Newest payload with timestamp <= t.
  std::optional<Stamped<T>> read_at(double t) const {
    std::lock_guard<std::mutex> lock(mutex_);
    for (std::size_t k = 0; k < count_; ++k) {
      const std::size_t i = (newest_ + Depth - k) % Depth;
      if (slots_[i].timestamp <= t) return slots_[i];
    }
    return std::nullopt;
  }

  std::optional<Stamped<T>> latest() const {
    std::lock_guard<std::mutex> lock(mutex_);
    if (count_ == 0) return std::nullopt;
    return slots_[newest_];
  }

  void clear() {
    std::lock_guard<std::mutex> lock(mutex_);
    count_ = 0;
  }

 private:
  mutable std::mutex mutex_;
  std::array<Stamped<T>, Depth> slots_{};
  std::size_t newest_ = 0;
  std::size_t count_ = 0;
};

/// What the stepper sees at one tick after applying the staleness policy.
struct SensorSnapshot {
  double time = 0.0;
  ScanPointSet scan;                       // empty when stale or missing
  std::vector<StarObstacle> obstacles;     // propagated to `time`; empty when stale
  std::optional<Vec2> nominal;             // nullopt when stale or missing
  bool scan_stale = true;
  bool obstacles_stale = true;
  bool nominal_stale = true;
};

/// Three independent producer channels (scan, analytic obstacles, nominal
/// command) read by one consumer. Each push is atomic with respect to reads.
class SensorMailbox {
 public:
  explicit SensorMailbox(StalenessLimits limits = {});

  PushAck push_scan(ScanPointSet scan, double timestamp);
  PushAck push_obstacles(std::vector<StarObstacle> obstacles, double timestamp);
  PushAck push_nominal(Vec2 velocity, double timestamp);

  std::optional<Stamped<ScanPointSet>> latest_scan(double t) const { return scan_.read_at(t); }
  std::optional<Stamped<std::vector<StarObstacle>>> latest_obstacles(double t) const {
    return obstacles_.read_at(t);
  }
  std::optional<Stamped<Vec2>> latest_nominal(double t) const { return nominal_.read_at(t); }

  SensorSnapshot snapshot(double t) const;
  const StalenessLimits& limits() const { return limits_; }
  void clear();

 private:
  StalenessLimits limits_;
  LatestValue<ScanPointSet> scan_;
  LatestValue<std::vector<StarObstacle>> obstacles_;
  LatestValue<Vec2> nominal_;
};

/// Linear and angular command of a differential-drive base.
struct WheelCommand {
  double linear = 0.0;   // m/s
  double angular = 0.0;  // rad/s
};

/// (J^Q)^-1 with J^Q = diag(1, d_c): body-frame control-point velocity to wheel command.
WheelCommand to_wheel_command(const Vec2& body_velocity, double control_point_offset);
/// J^Q: wheel command back to the body-frame control-point velocity.
Vec2 from_wheel_command(const WheelCommand& command, double control_point_offset);

/// Control point (disc center) of a pose: d_c ahead of the wheel axle.
Vec2 control_point(const Pose& pose, double control_point_offset);

/// Relative controller input ||xi_dot - v_N|| / ||v_N||.
double control_contribution(const Vec2& modulated, const Vec2& nominal);

/// Mean clearance of the `count` closest points (||p - x|| - R).
double mean_closest_clearance(std::span<const Vec2> points, const Vec2& x, double agent_radius,
                              std::size_t count = 10);

struct ControlTick {
  double time = 0.0;
  Pose pose;
  Vec2 control_point = Vec2::Zero();
  Vec2 nominal = Vec2::Zero();    // world frame
  Vec2 velocity = Vec2::Zero();   // modulated, world frame
  WheelCommand command;
  double control_contribution = 0.0;
  double min_distance = 0.0;
  bool collision = false;
  bool stale_nominal = false;
};

/// Gap to the nearest point kept by the barrier when the agent is already
/// inside the missed-edge margin.
inline constexpr double kRecoveryGap = 1e-6;  // m

struct RuntimeOptions {
  AvoidanceMode mode = AvoidanceMode::kMixed;
  bool tail_negligence = true;
  /// Inflate analytic obstacles by the agent radius before modulation.
  bool inflate_by_radius = true;
  /// Sharpest corner expected in the scanned world; sets the missed-edge margin
  /// added to the radius for sampled points. 0 disables the margin.
  double min_obstacle_angle = kPi / 3.0;
};

/// Snapshot data in the form handed to the modulation, computed once per tick.
struct PreparedInputs {
  std::vector<StarObstacle> obstacles;  // inflated by the agent radius when configured
  ScanPointSet scan;                    // full scan, for metrics
  ScanPointSet retained;                // points used by the modulation
};

/// Evaluation of the modulation at one control point from a snapshot.
struct Evaluation {
  Vec2 velocity = Vec2::Zero();
  bool collision = false;
};

/// Asynchronous controller: producers push into the mailbox, step() runs at
/// the control rate on a single thread.
class ControlRuntime {
 public:
  ControlRuntime(AgentConfig config, RuntimeOptions options = {}, StalenessLimits limits = {});

  SensorMailbox& mailbox() { return mailbox_; }
  const SensorMailbox& mailbox() const { return mailbox_; }
  const AgentConfig& config() const { return config_; }
  const RuntimeOptions& options() const { return options_; }

  /// Agent configuration for sampled points: radius grown by the missed-edge margin.
  AgentConfig sampled_config(double sampling_angle) const;

  /// Mode-dependent channel selection, obstacle inflation, and point pruning.
  PreparedInputs prepare(const SensorSnapshot& snapshot) const;

  /// Modulated world-frame velocity at the control point `x` for nominal `v`.
  /// Contact or interior queries yield a zero velocity with the collision flag.
  Evaluation evaluate(const PreparedInputs& inputs, const Vec2& x, const Vec2& nominal) const;

  /// Full control tick using the mailbox nominal command.
  ControlTick step(const Pose& pose, double t) const;

  /// Tick bookkeeping (commands, metrics) for an already evaluated velocity.
  ControlTick make_tick(const Pose& pose, double t, const PreparedInputs& inputs,
                        const Vec2& nominal, const Evaluation& evaluation) const;

 private:
  AgentConfig config_;
  RuntimeOptions options_;
  SensorMailbox mailbox_;
};

}  // namespace fastmod
