#include "fastmod/bridge_session.hpp"

#include <cmath>

namespace fastmod {
namespace {

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json vec_json(const Vec2& v) { return Json::array({v.x(), v.y()}); }

std::string error_frame(std::string_view message) {
  return Json{{"type", "error"}, {"message", message}}.dump();
}

}  // namespace

std::vector<Vec2> decimate_points(std::span<const Vec2> points, std::size_t max_points) {
  if (max_points == 0) return {};
  if (points.size() <= max_points) return {points.begin(), points.end()};
  const std::size_t stride = (points.size() + max_points - 1) / max_points;
  std::vector<Vec2> out;
  out.reserve(max_points);
  for (std::size_t i = 0; i < points.size(); i += stride) out.push_back(points[i]);
  return out;
}

BridgeSession::BridgeSession(Scenario scenario, BridgeOptions options)
    : options_(options), initial_(scenario) {
  if (!(options_.frame_rate > 0.0)) throw Error(ErrorKind::kInvalidConfig, "frame rate must be positive");
  reset(std::move(scenario));
}

void BridgeSession::reset(Scenario scenario) {
  loop_ = std::make_unique<ClosedLoop>(std::move(scenario), true);
  last_tick_.reset();
  pending_ = 0.0;
  next_frame_ = 0.0;
  in_collision_ = false;
  converged_ = false;
  stale_ = false;
}

std::vector<std::string> BridgeSession::handle(std::string_view message) {
  Json j;
  try {
    j = Json::parse(message);
  } catch (const Json::parse_error&) {
    return {error_frame("malformed JSON")};
  }
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    return {error_frame("/type: missing message type")};
  }
  const std::string type = j["type"].get<std::string>();
  if (type == "nominal") {
    const Json& v = j.contains("v") ? j["v"] : Json();
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      return {error_frame("/v: expected an array of 2 numbers")};
    }
    const Vec2 velocity(v[0].get<double>(), v[1].get<double>());
    if (!velocity.allFinite()) return {error_frame("/v: expected finite numbers")};
    loop_->runtime().mailbox().push_nominal(velocity, time());
    return {};
  }
  if (type == "reset") {
    if (!j.contains("scenario")) {
      reset(initial_);
      return {};
    }
    try {
      reset(scenario_from_json(j["scenario"]));
    } catch (const Error& e) {
      std::string what = e.what();
      if (const auto pos = what.find(": "); pos != std::string::npos) what = what.substr(pos + 2);
      return {error_frame("/scenario" + what)};
    }
    return {};
  }
  if (type == "pause") {
    if (j.contains("paused")) {
      if (!j["paused"].is_boolean()) return {error_frame("/paused: expected a boolean")};
      paused_ = j["paused"].get<bool>();
    } else {
      paused_ = !paused_;
    }
    return {};
  }
  return {error_frame("/type: unknown message type \"" + type + "\"")};
}

std::vector<std::string> BridgeSession::advance(double seconds) {
  std::vector<std::string> out;
  if (paused_ || !(seconds > 0.0)) return out;
  const double dt = loop_->scenario().integrator.dt;
  const double frame_period = 1.0 / options_.frame_rate;
  pending_ += seconds;
  while (pending_ >= dt - 1e-12) {
    pending_ -= dt;
    const ControlTick tick = loop_->step();
    last_tick_ = tick;

    const bool collision = tick.collision || loop_->clearance() < -kCollisionTolerance;
    if (collision && !in_collision_) out.push_back(event_frame("collision"));
    in_collision_ = collision;
    if (tick.stale_nominal && !stale_) out.push_back(event_frame("stale_nominal"));
    stale_ = tick.stale_nominal;
    if (const auto& a = loop_->scenario().nominal.attractor; a && !converged_) {
      if ((control_point(loop_->pose(), loop_->scenario().agent.control_point_offset) - *a).norm() <
          kConvergenceRadius) {
        converged_ = true;
        out.push_back(event_frame("converged"));
      }
    }
    if (tick.time >= next_frame_ - 1e-9) {
      out.push_back(state_frame());
      next_frame_ += frame_period;
      if (next_frame_ <= tick.time) next_frame_ = tick.time + frame_period;
    }
  }
  return out;
}

std::string BridgeSession::state_frame() const {
  Json j;
  j["type"] = "state";
  const ControlTick tick = last_tick_.value_or(ControlTick{});
  const Pose pose = last_tick_ ? tick.pose : loop_->pose();
  j["t"] = last_tick_ ? tick.time : loop_->time();
  j["pose"] = Json::array({pose.x, pose.y, pose.theta});
  j["xi_dot"] = vec_json(tick.velocity);
  j["v_n"] = vec_json(tick.nominal);
  Json scan = Json::array();
  for (const Vec2& p : decimate_points(loop_->last_scan().points, options_.max_scan_points)) {
    scan.push_back(vec_json(p));
  }
  j["scan"] = std::move(scan);
  Json obstacles = Json::array();
  const Scenario& s = loop_->scenario();
  if (s.mode != AvoidanceMode::kSampled) {
    for (const WorldObstacle& w : world_at(s.obstacles, j["t"].get<double>())) {
      if (s.mode == AvoidanceMode::kAnalytic || w.tracked) obstacles.push_back(obstacle_to_json(w.track()));
    }
  }
  j["obstacles"] = std::move(obstacles);
  j["delta_c"] = finite_or_null(tick.control_contribution);
  j["d_min"] = finite_or_null(tick.min_distance);
  return j.dump();
}

std::string BridgeSession::event_frame(std::string_view kind) const {
  return Json{{"type", "event"}, {"kind", kind}, {"t", time()}}.dump();
}

}  // namespace fastmod
