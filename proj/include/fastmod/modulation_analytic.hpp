#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fastmod/obstacle_world.hpp"

namespace fastmod {

/// Raw influence weights below this are treated as "no obstacle influence".
inline constexpr double kWeightEpsilon = 1e-12;

/// Lower clamp of the alignment factor c_i in decreasing_tail_weight.
inline constexpr double kTailAlignmentFloor = 1e-5;

struct ObstacleWeights {
  std::vector<double> raw;
  std::vector<double> normalized;
  double raw_sum = 0.0;
};

struct EigenPair {
  double reference = 1.0;
  double tangent = 1.0;
};

struct SummedNormal {
  Vec2 unscaled = Vec2::Zero();  // c^n r + n^delta
  Vec2 normal = Vec2::Zero();
  double scaling = 1.0;          // c^n in [1, sqrt 2]
};

/// Full decomposition of the single virtual obstacle at one query point.
struct ModulationFrame {
  Vec2 averaged_reference = Vec2::Zero();  // weighted sum, norm <= 1
  Vec2 reference = Vec2::Zero();           // unit
  Vec2 normal_offset = Vec2::Zero();
  SummedNormal normal;
  Mat2 basis = Mat2::Identity();
  EigenPair eigenvalues;                   // after tail negligence when enabled
};

struct AnalyticOptions {
  bool tail_negligence = true;
  bool decreasing_tail_weight = false;
};

/// (D_scal / (Gamma - 1))^s for one Gamma value. Throws kInsideObstacle for Gamma <= 1.
double raw_obstacle_weight(double gamma_value, const AgentConfig& config);

/// Normalizes only when the raw sum exceeds one.
ObstacleWeights normalize_weights(std::vector<double> raw);

ObstacleWeights obstacle_weights(std::span<const StarObstacle> obstacles, const Vec2& x,
                                 const AgentConfig& config);

Vec2 averaged_reference(std::span<const double> weights, std::span<const Vec2> references);

/// Normal offset sum and invertibility rescaling around the unit reference.
SummedNormal summed_normal(std::span<const double> weights, std::span<const Vec2> normals,
                           std::span<const Vec2> references, const Vec2& reference);

/// Same as above when the normal offset has already been accumulated.
SummedNormal summed_normal_from_offset(const Vec2& normal_offset, const Vec2& reference);

EigenPair eigenvalues_analytic(double averaged_reference_norm, double reactivity);

EigenPair tail_eigenvalues(const EigenPair& eigen, const Vec2& averaged_reference,
                           const Vec2& reference, const Vec2& nominal, double power_weight);

/// Down-weights obstacles behind the nominal motion, in place.
void decreasing_tail_weight(std::span<double> raw_weights, std::span<const Vec2> references,
                            const Vec2& nominal);

/// Frame of the virtual obstacle; nullopt when no obstacle has any influence
/// (raw weights all <= kWeightEpsilon) or the averaged reference cancels out.
std::optional<ModulationFrame> analytic_frame(const Vec2& x, const Vec2& nominal,
                                              std::span<const StarObstacle> obstacles,
                                              const AgentConfig& config,
                                              const AnalyticOptions& options = {});

/// Single-modulation obstacle avoidance for analytic star worlds.
Vec2 modulate_analytic(const Vec2& x, const Vec2& nominal, std::span<const StarObstacle> obstacles,
                       const AgentConfig& config, const AnalyticOptions& options = {});

}  // namespace fastmod
