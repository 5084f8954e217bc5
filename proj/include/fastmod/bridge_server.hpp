#pragma once

#include <atomic>
#include <cstdint>
#include <memory>

#include "fastmod/bridge_session.hpp"

namespace fastmod {

/// WebSocket front end of BridgeSession. Each client connection gets its own
/// session (a copy of the scenario) driven by a real-time timer; all sessions
/// share one I/O thread.
class BridgeServer {
 public:
  /// Binds immediately; port 0 picks a free port.
  BridgeServer(Scenario scenario, std::uint16_t port, BridgeOptions options = {},
               const char* address = "127.0.0.1");
  ~BridgeServer();
  BridgeServer(const BridgeServer&) = delete;
  BridgeServer& operator=(const BridgeServer&) = delete;

  std::uint16_t port() const;

  /// Serves until stop() is called (from any thread).
  void run();
  void stop();

  std::size_t sessions_started() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace fastmod
