#include "fastmod/control_runtime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fastmod {

SensorMailbox::SensorMailbox(StalenessLimits limits) : limits_(limits) {}

PushAck SensorMailbox::push_scan(ScanPointSet scan, double timestamp) {
  scan.timestamp = timestamp;
  return scan_.push(std::move(scan), timestamp);
}

PushAck SensorMailbox::push_obstacles(std::vector<StarObstacle> obstacles, double timestamp) {
  return obstacles_.push(std::move(obstacles), timestamp);
}

PushAck SensorMailbox::push_nominal(Vec2 velocity, double timestamp) {
  return nominal_.push(velocity, timestamp);
}

void SensorMailbox::clear() {
  scan_.clear();
  obstacles_.clear();
  nominal_.clear();
}

SensorSnapshot SensorMailbox::snapshot(double t) const {
  SensorSnapshot snap;
  snap.time = t;
  if (auto scan = scan_.read_at(t); scan && t - scan->timestamp <= limits_.scan) {
    snap.scan = std::move(scan->value);
    snap.scan_stale = false;
  }
  if (auto obstacles = obstacles_.read_at(t); obstacles && t - obstacles->timestamp <= limits_.obstacles) {
    // Constant-velocity propagation from the description epoch to the tick.
    const double age = t - obstacles->timestamp;
    snap.obstacles.reserve(obstacles->value.size());
    for (const StarObstacle& o : obstacles->value) snap.obstacles.push_back(o.advanced(age));
    snap.obstacles_stale = false;
  }
  if (auto nominal = nominal_.read_at(t); nominal && t - nominal->timestamp <= limits_.nominal) {
    snap.nominal = nominal->value;
    snap.nominal_stale = false;
  }
  return snap;
}

WheelCommand to_wheel_command(const Vec2& body_velocity, double control_point_offset) {
  WheelCommand cmd;
  cmd.linear = body_velocity.x();
  // A zero offset leaves the heading undetermined; the base is then driven holonomically.
  cmd.angular = control_point_offset > 0.0 ? body_velocity.y() / control_point_offset : 0.0;
  return cmd;
}

Vec2 from_wheel_command(const WheelCommand& command, double control_point_offset) {
  return {command.linear, control_point_offset * command.angular};
}

Vec2 control_point(const Pose& pose, double control_point_offset) {
  return pose.position() + control_point_offset * pose.heading();
}

double control_contribution(const Vec2& modulated, const Vec2& nominal) {
  const double speed = nominal.norm();
  const double delta = (modulated - nominal).norm();
  if (speed == 0.0) return delta == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return delta / speed;
}

double mean_closest_clearance(std::span<const Vec2> points, const Vec2& x, double agent_radius,
                              std::size_t count) {
  if (points.empty() || count == 0) return std::numeric_limits<double>::infinity();
  std::vector<double> clearances;
  clearances.reserve(points.size());
  for (const Vec2& p : points) clearances.push_back((p - x).norm() - agent_radius);
  const std::size_t k = std::min(count, clearances.size());
  std::nth_element(clearances.begin(), clearances.begin() + (k - 1), clearances.end());
  std::sort(clearances.begin(), clearances.begin() + k);
  return std::accumulate(clearances.begin(), clearances.begin() + k, 0.0) / static_cast<double>(k);
}

ControlRuntime::ControlRuntime(AgentConfig config, RuntimeOptions options, StalenessLimits limits)
    : config_(config), options_(options), mailbox_(limits) {
  config_.validate();
}

AgentConfig ControlRuntime::sampled_config(double sampling_angle) const {
  AgentConfig c = config_;
  if (options_.min_obstacle_angle > 0.0) {
    c.radius += config_.radius * missed_edge_margin(sampling_angle, options_.min_obstacle_angle);
  }
  return c;
}

PreparedInputs ControlRuntime::prepare(const SensorSnapshot& snapshot) const {
  PreparedInputs in;
  if (options_.mode != AvoidanceMode::kAnalytic) in.scan = snapshot.scan;
  if (options_.mode != AvoidanceMode::kSampled) {
    in.obstacles.reserve(snapshot.obstacles.size());
    for (const StarObstacle& o : snapshot.obstacles) {
      in.obstacles.push_back(options_.inflate_by_radius ? o.inflated(config_.radius) : o);
    }
  }
  // Points are pruned against the described surfaces, not the inflated ones.
  if (options_.mode == AvoidanceMode::kMixed && !snapshot.obstacles.empty()) {
    in.retained = prune_points(in.scan, snapshot.obstacles);
  } else {
    in.retained = in.scan;
  }
  return in;
}

Evaluation ControlRuntime::evaluate(const PreparedInputs& inputs, const Vec2& x,
                                    const Vec2& nominal) const {
  const auto modulate = [&](const AgentConfig& config) -> Vec2 {
    switch (options_.mode) {
      case AvoidanceMode::kAnalytic:
        return modulate_analytic(x, nominal, inputs.obstacles, config,
                                 AnalyticOptions{options_.tail_negligence, false});
      case AvoidanceMode::kSampled:
        return modulate_sampled(x, nominal, inputs.retained, config);
      case AvoidanceMode::kMixed:
        return modulate_mixed(x, nominal, inputs.retained, inputs.obstacles, config,
                              MixedOptions{options_.tail_negligence, false});
    }
    return nominal;
  };
  AgentConfig config = sampled_config(inputs.retained.sampling_angle);
  if (config.radius > config_.radius && !inputs.retained.points.empty()) {
    // Inside the missed-edge margin: hold the barrier just below the nearest
    // point instead of dropping to the physical radius.
    double nearest = std::numeric_limits<double>::infinity();
    for (const Vec2& p : inputs.retained.points) nearest = std::min(nearest, (p - x).norm());
    config.radius = std::max(config_.radius, std::min(config.radius, nearest - kRecoveryGap));
  }
  Evaluation out;
  try {
    out.velocity = modulate(config);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kContact && e.kind() != ErrorKind::kInsideObstacle &&
        e.kind() != ErrorKind::kGammaSingularity) {
      throw;
    }
    out.velocity = Vec2::Zero();
    out.collision = true;
  }
  return out;
}

ControlTick ControlRuntime::make_tick(const Pose& pose, double t, const PreparedInputs& inputs,
                                      const Vec2& nominal, const Evaluation& evaluation) const {
  ControlTick tick;
  tick.time = t;
  tick.pose = pose;
  tick.control_point = control_point(pose, config_.control_point_offset);
  tick.nominal = nominal;
  tick.velocity = evaluation.velocity;
  tick.collision = evaluation.collision;
  tick.command = to_wheel_command(rotate(evaluation.velocity, -pose.theta),
                                  config_.control_point_offset);
  tick.control_contribution = control_contribution(evaluation.velocity, nominal);
  if (!inputs.scan.points.empty()) {
    tick.min_distance = mean_closest_clearance(inputs.scan.points, tick.control_point, config_.radius);
  } else {
    tick.min_distance = std::numeric_limits<double>::infinity();
    for (const StarObstacle& o : inputs.obstacles) {
      const double clearance = options_.inflate_by_radius
                                   ? o.signed_distance(tick.control_point)
                                   : o.signed_distance(tick.control_point) - config_.radius;
      tick.min_distance = std::min(tick.min_distance, clearance);
    }
  }
  return tick;
}

ControlTick ControlRuntime::step(const Pose& pose, double t) const {
  const SensorSnapshot snapshot = mailbox_.snapshot(t);
  const PreparedInputs inputs = prepare(snapshot);
  const Vec2 x = control_point(pose, config_.control_point_offset);
  if (!snapshot.nominal) {
    // Safe stop: no fresh operator or planner command.
    ControlTick tick = make_tick(pose, t, inputs, Vec2::Zero(), Evaluation{});
    tick.stale_nominal = true;
    return tick;
  }
  const Evaluation evaluation = evaluate(inputs, x, *snapshot.nominal);
  return make_tick(pose, t, inputs, *snapshot.nominal, evaluation);
}

}  // namespace fastmod
