#include "fastmod/modulation_analytic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fastmod/basis.hpp"

namespace fastmod {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kHalfSqrt2 = 0.70710678118654752440;

double clamp_unit(double v) { return std::min(v, 1.0); }

// Weighted accumulators of the virtual obstacle, before normalization.
struct Accumulated {
  double raw_sum = 0.0;
  double raw_max = 0.0;
  Vec2 reference_sum = Vec2::Zero();
  Vec2 offset_sum = Vec2::Zero();
};

std::optional<ModulationFrame> frame_from_accumulated(const Accumulated& acc, const Vec2& nominal,
                                                      const AgentConfig& config,
                                                      const AnalyticOptions& options) {
  if (acc.raw_max <= kWeightEpsilon) return std::nullopt;
  const double scale = acc.raw_sum > 1.0 ? 1.0 / acc.raw_sum : 1.0;
  ModulationFrame frame;
  frame.averaged_reference = scale * acc.reference_sum;
  const double ref_norm = frame.averaged_reference.norm();
  if (ref_norm == 0.0) return std::nullopt;
  frame.reference = frame.averaged_reference / ref_norm;
  frame.normal_offset = scale * acc.offset_sum;
  frame.normal = summed_normal_from_offset(frame.normal_offset, frame.reference);
  frame.basis.col(0) = frame.reference;
  frame.basis.col(1) = tangent_2d(frame.normal.normal);
  frame.eigenvalues = eigenvalues_analytic(clamp_unit(ref_norm), config.reactivity);
  if (options.tail_negligence && nominal.norm() > 0.0) {
    frame.eigenvalues = tail_eigenvalues(frame.eigenvalues, frame.averaged_reference,
                                         frame.reference, nominal, config.power_weight);
  }
  return frame;
}

}  // namespace

double raw_obstacle_weight(double gamma_value, const AgentConfig& config) {
  const double dist = gamma_value - 1.0;
  if (!(dist > 0.0)) {
    std::ostringstream os;
    os << "gamma " << gamma_value << " <= 1";
    throw Error(ErrorKind::kInsideObstacle, os.str());
  }
  const double ratio = config.distance_scaling / dist;
  if (config.scaling_potential == 2.0) return ratio * ratio;
  return std::pow(ratio, config.scaling_potential);
}

ObstacleWeights normalize_weights(std::vector<double> raw) {
  ObstacleWeights w;
  for (double v : raw) w.raw_sum += v;
  w.normalized = raw;
  if (w.raw_sum > 1.0) {
    for (double& v : w.normalized) v /= w.raw_sum;
  }
  w.raw = std::move(raw);
  return w;
}

ObstacleWeights obstacle_weights(std::span<const StarObstacle> obstacles, const Vec2& x,
                                 const AgentConfig& config) {
  std::vector<double> raw;
  raw.reserve(obstacles.size());
  for (const StarObstacle& o : obstacles) raw.push_back(raw_obstacle_weight(gamma(o, x), config));
  return normalize_weights(std::move(raw));
}

Vec2 averaged_reference(std::span<const double> weights, std::span<const Vec2> references) {
  Vec2 sum = Vec2::Zero();
  for (std::size_t i = 0; i < weights.size(); ++i) sum += weights[i] * references[i];
  return sum;
}

SummedNormal summed_normal(std::span<const double> weights, std::span<const Vec2> normals,
                           std::span<const Vec2> references, const Vec2& reference) {
  Vec2 offset = Vec2::Zero();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    offset += weights[i] * (normals[i] - references[i]);
  }
  return summed_normal_from_offset(offset, reference);
}

SummedNormal summed_normal_from_offset(const Vec2& normal_offset, const Vec2& reference) {
  SummedNormal out;
  const double offset_norm = normal_offset.norm();
  // Zero offset (all normals equal their references): the spheres limit.
  if (offset_norm > 0.0) {
    const double alignment = -reference.dot(normal_offset) / offset_norm;
    out.scaling = alignment < kHalfSqrt2 ? 1.0 : kSqrt2 * alignment;
  }
  out.unscaled = out.scaling * reference + normal_offset;
  out.normal = out.unscaled.normalized();
  return out;
}

EigenPair eigenvalues_analytic(double averaged_reference_norm, double reactivity) {
  const double p = std::pow(averaged_reference_norm, reactivity);
  return {1.0 - p, 1.0 + p};
}

EigenPair tail_eigenvalues(const EigenPair& eigen, const Vec2& averaged_reference,
                           const Vec2& reference, const Vec2& nominal, double power_weight) {
  const double ref_norm = averaged_reference.norm();
  const double weight_ref = ref_norm > 1.0 ? 1.0 / ref_norm : 1.0;
  const double alignment = reference.dot(nominal) / nominal.norm();
  const double weight_vel = alignment > 0.0 ? std::pow(alignment, power_weight) : 0.0;
  const double sign_vel = weight_vel > 0.0 ? 1.0 : 0.0;
  EigenPair out;
  const double blend = weight_ref * weight_vel;
  out.tangent = blend + (1.0 - blend) * eigen.tangent;
  out.reference = out.tangent * weight_ref * sign_vel + (1.0 - weight_ref * sign_vel) * eigen.reference;
  return out;
}

void decreasing_tail_weight(std::span<double> raw_weights, std::span<const Vec2> references,
                            const Vec2& nominal) {
  double sum = 0.0;
  for (double w : raw_weights) sum += w;
  const double speed = nominal.norm();
  if (sum <= 0.0 || speed == 0.0) return;
  for (std::size_t i = 0; i < raw_weights.size(); ++i) {
    const double c = std::max(
        1.0 - nominal.dot(references[i]) / (speed * references[i].norm()), kTailAlignmentFloor);
    raw_weights[i] *= std::pow(raw_weights[i] / sum, 1.0 / c);
  }
}

std::optional<ModulationFrame> analytic_frame(const Vec2& x, const Vec2& nominal,
                                              std::span<const StarObstacle> obstacles,
                                              const AgentConfig& config,
                                              const AnalyticOptions& options) {
  Accumulated acc;
  if (!options.decreasing_tail_weight || nominal.norm() == 0.0) {
    for (const StarObstacle& o : obstacles) {
      const SurfaceQuery q = query_surface(o, x);
      const double w = raw_obstacle_weight(q.gamma, config);
      acc.raw_sum += w;
      acc.raw_max = std::max(acc.raw_max, w);
      acc.reference_sum += w * q.reference;
      acc.offset_sum += w * (q.normal - q.reference);
    }
    return frame_from_accumulated(acc, nominal, config, options);
  }

  std::vector<double> raw;
  std::vector<Vec2> refs;
  std::vector<Vec2> normals;
  raw.reserve(obstacles.size());
  refs.reserve(obstacles.size());
  normals.reserve(obstacles.size());
  for (const StarObstacle& o : obstacles) {
    const SurfaceQuery q = query_surface(o, x);
    raw.push_back(raw_obstacle_weight(q.gamma, config));
    refs.push_back(q.reference);
    normals.push_back(q.normal);
  }
  decreasing_tail_weight(raw, refs, nominal);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    acc.raw_sum += raw[i];
    acc.raw_max = std::max(acc.raw_max, raw[i]);
    acc.reference_sum += raw[i] * refs[i];
    acc.offset_sum += raw[i] * (normals[i] - refs[i]);
  }
  return frame_from_accumulated(acc, nominal, config, options);
}

Vec2 modulate_analytic(const Vec2& x, const Vec2& nominal, std::span<const StarObstacle> obstacles,
                       const AgentConfig& config, const AnalyticOptions& options) {
  const std::optional<ModulationFrame> frame = analytic_frame(x, nominal, obstacles, config, options);
  if (!frame) return nominal;
  return apply_modulation_2d(frame->reference, frame->normal.normal, frame->eigenvalues.reference,
                             frame->eigenvalues.tangent, nominal);
}

}  // namespace fastmod
