#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fastmod/scenario_io.hpp"
#include "fastmod/simulator.hpp"

namespace fastmod {

struct BridgeOptions {
  double frame_rate = 30.0;           // Hz of state frames (simulated time)
  std::size_t max_scan_points = 512;  // per state frame
  double time_scale = 1.0;            // simulated seconds per wall-clock second (server)
};

/// Every k-th point so that at most `max_points` remain; order is preserved.
std::vector<Vec2> decimate_points(std::span<const Vec2> points, std::size_t max_points);

/// Shared-control session independent of the transport. Incoming client
/// frames feed the runtime mailbox; advance() runs the control loop and
/// returns the outgoing frames (state at the frame rate, events on change).
///
/// client -> server: {"type":"nominal","v":[vx,vy]}, {"type":"reset","scenario":{...}},
///                   {"type":"pause"} (toggles; "paused": bool sets explicitly)
/// server -> client: {"type":"state",...}, {"type":"event","kind":...},
///                   {"type":"error","message":...}
class BridgeSession {
 public:
  explicit BridgeSession(Scenario scenario, BridgeOptions options = {});

  /// Handles one client text frame; returns frames to send back (errors only).
  std::vector<std::string> handle(std::string_view message);

  /// Advances by whole control ticks covering `seconds` of simulated time.
  std::vector<std::string> advance(double seconds);

  double time() const { return loop_->time(); }
  const Pose& pose() const { return loop_->pose(); }
  bool paused() const { return paused_; }
  const std::optional<ControlTick>& last_tick() const { return last_tick_; }
  const Scenario& scenario() const { return loop_->scenario(); }

  /// State frame of the last tick (pose and metrics at its start).
  std::string state_frame() const;

 private:
  void reset(Scenario scenario);
  std::string event_frame(std::string_view kind) const;

  BridgeOptions options_;
  Scenario initial_;
  std::unique_ptr<ClosedLoop> loop_;
  std::optional<ControlTick> last_tick_;
  bool paused_ = false;
  double pending_ = 0.0;
  double next_frame_ = 0.0;
  bool in_collision_ = false;
  bool converged_ = false;
  bool stale_ = false;
};

}  // namespace fastmod
