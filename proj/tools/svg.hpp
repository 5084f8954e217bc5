#pragma once

#include <span>
#include <string>

#include "fastmod/scenario_io.hpp"

namespace fastmod::svg {

struct Viewport {
  Vec2 lower{-5.0, -5.0};
  Vec2 upper{5.0, 5.0};
  double pixels_per_meter = 60.0;
};

/// Bounding box of obstacles, start, and attractor, padded.
Viewport fit_viewport(const Scenario& scenario, double padding = 0.5);

/// Obstacles (tracked ones filled differently), start, attractor, trajectory.
std::string trajectory_svg(const Scenario& scenario, std::span<const ControlTick> trajectory,
                           const Viewport& view, const Provenance& provenance);

/// Quiver of the modulated field; sampled points and analytic obstacles both drawn.
std::string field_svg(const Scenario& scenario, const FieldGrid& field, const Viewport& view,
                      const Provenance& provenance);

}  // namespace fastmod::svg
