#include "fastmod/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "fastmod/basis.hpp"

namespace fastmod {

bool is_covered_by_obstacle(const Vec2& point, std::span<const StarObstacle> obstacles) {
  for (const StarObstacle& o : obstacles) {
    if ((point - o.reference_point()).norm() == 0.0) return true;
    if (gamma(o, point) <= 1.0 + kBoundaryTolerance) return true;
  }
  return false;
}

ScanPointSet prune_points(const ScanPointSet& scan, std::span<const StarObstacle> obstacles) {
  ScanPointSet out;
  out.timestamp = scan.timestamp;
  out.sampling_angle = scan.sampling_angle;
  out.points.reserve(scan.points.size());
  for (const Vec2& p : scan.points) {
    if (!is_covered_by_obstacle(p, obstacles)) out.points.push_back(p);
  }
  return out;
}

FusionWeights fusion_weights(double sampled_norm, double analytic_norm) {
  const double limit = 1.0 - kFusionSaturation;
  const bool sampled_saturated = sampled_norm >= limit;
  const bool analytic_saturated = analytic_norm >= limit;
  if (sampled_saturated && analytic_saturated) {
    // Share by the excess over saturation, so each side fades in continuously.
    const double excess_sampled = std::max(sampled_norm - limit, 0.0);
    const double excess_analytic = std::max(analytic_norm - limit, 0.0);
    const double sum = excess_sampled + excess_analytic;
    if (sum <= 0.0) return {0.5, 0.5};
    return {excess_sampled / sum, excess_analytic / sum};
  }
  if (sampled_saturated) return {1.0, 0.0};
  if (analytic_saturated) return {0.0, 1.0};
  const double raw_sampled = 1.0 / (1.0 - sampled_norm) - 1.0;
  const double raw_analytic = 1.0 / (1.0 - analytic_norm) - 1.0;
  const double sum = raw_sampled + raw_analytic;
  if (sum <= 0.0) return {0.0, 0.0};
  return {raw_sampled / sum, raw_analytic / sum};
}

Vec2 mixed_reference(const FusionWeights& weights, const Vec2& sampled_reference,
                     const Vec2& analytic_reference) {
  return weights.sampled * sampled_reference - weights.analytic * analytic_reference;
}

double extended_analytic_magnitude(const Vec2& averaged_reference, double raw_sum,
                                   const AgentConfig& config) {
  const double norm = std::min(averaged_reference.norm(), 1.0);
  if (raw_sum <= 1.0) return norm;
  return norm * std::pow(raw_sum, 1.0 / config.scaling_potential);
}

double importance_scaling(double sampling_angle, int dimension) {
  return 2.0 * kPi / std::pow(sampling_angle, dimension - 1);
}

MixedFrame mixed_frame(const Vec2& x, const Vec2& nominal, const ScanPointSet& scan,
                       std::span<const StarObstacle> obstacles, const AgentConfig& config,
                       const MixedOptions& options) {
  MixedFrame frame;

  const bool prune = options.prune && !obstacles.empty();
  const ScanPointSet pruned = prune ? prune_points(scan, obstacles) : ScanPointSet{};
  const ScanPointSet& retained = prune ? pruned : scan;
  frame.retained_points = retained.points.size();
  if (!retained.points.empty()) {
    frame.sampled_reference =
        aggregated_reference(retained.points, x, config, retained.sampling_angle);
  }

  double raw_sum = 0.0;
  double raw_max = 0.0;
  Vec2 reference_sum = Vec2::Zero();
  Vec2 offset_sum = Vec2::Zero();
  Vec2 velocity_sum = Vec2::Zero();
  for (const StarObstacle& o : obstacles) {
    const SurfaceQuery q = query_surface(o, x);
    const double w = raw_obstacle_weight(q.gamma, config);
    raw_sum += w;
    raw_max = std::max(raw_max, w);
    reference_sum += w * q.reference;
    offset_sum += w * (q.normal - q.reference);
    velocity_sum += w * o.velocity_at(x);
  }
  // Same far-field short-circuit as the standalone analytic path.
  const double scale = raw_max <= kWeightEpsilon ? 0.0 : (raw_sum > 1.0 ? 1.0 / raw_sum : 1.0);
  frame.analytic_reference = scale * reference_sum;
  frame.analytic_normal_offset = scale * offset_sum;
  frame.total_velocity = scale * velocity_sum;

  frame.analytic_magnitude = extended_analytic_magnitude(frame.analytic_reference, raw_sum, config);
  frame.weights = fusion_weights(frame.sampled_reference.norm(), frame.analytic_magnitude);
  if (!frame.weights.has_information()) return frame;

  frame.damped_velocity = frame.weights.analytic * frame.total_velocity;
  frame.mixed_reference =
      mixed_reference(frame.weights, frame.sampled_reference, frame.analytic_reference);
  const double mixed_norm = frame.mixed_reference.norm();
  if (mixed_norm == 0.0) return frame;

  frame.identity = false;
  const Vec2 toward = frame.mixed_reference / mixed_norm;
  frame.reference = -toward;
  const SummedNormal normal =
      summed_normal_from_offset(frame.weights.analytic * frame.analytic_normal_offset,
                                frame.reference);
  frame.normal = normal.normal;

  const Vec2 relative = nominal - frame.damped_velocity;
  frame.eigenvalues.reference = eigenvalue_reference_sampled(mixed_norm, toward.dot(relative));
  frame.eigenvalues.tangent = eigenvalue_tangent_sampled(mixed_norm);

  // Tail negligence for the analytic share only: w^o = 0 leaves the sampled path untouched.
  const double speed = relative.norm();
  if (options.tail_negligence && frame.weights.analytic > 0.0 && speed > 0.0) {
    const double weight_ref = mixed_norm > 1.0 ? 1.0 / mixed_norm : 1.0;
    const double alignment = frame.reference.dot(relative) / speed;
    const double weight_vel = alignment > 0.0 ? std::pow(alignment, config.power_weight) : 0.0;
    const double sign_vel = weight_vel > 0.0 ? 1.0 : 0.0;
    const double share = frame.weights.analytic * weight_ref;
    const double blend = share * weight_vel;
    const double tangent = blend + (1.0 - blend) * frame.eigenvalues.tangent;
    frame.eigenvalues.reference =
        tangent * share * sign_vel + (1.0 - share * sign_vel) * frame.eigenvalues.reference;
    frame.eigenvalues.tangent = tangent;
  }
  return frame;
}

Vec2 apply_mixed_matrix(const MixedFrame& frame, const Vec2& v) {
  if (frame.identity) return v;
  return apply_modulation_2d(frame.reference, frame.normal, frame.eigenvalues.reference,
                             frame.eigenvalues.tangent, v);
}

Vec2 modulate_mixed(const Vec2& x, const Vec2& nominal, const ScanPointSet& scan,
                    std::span<const StarObstacle> obstacles, const AgentConfig& config,
                    const MixedOptions& options) {
  const MixedFrame frame = mixed_frame(x, nominal, scan, obstacles, config, options);
  if (frame.identity) return nominal;
  return apply_mixed_matrix(frame, nominal - frame.damped_velocity) + frame.damped_velocity;
}

}  // namespace fastmod
