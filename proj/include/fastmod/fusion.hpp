#pragma once

#include <span>

#include "fastmod/modulation_analytic.hpp"
#include "fastmod/modulation_sampled.hpp"

namespace fastmod {

/// Guard keeping the fusion weights finite as a reference magnitude nears one.
inline constexpr double kFusionSaturation = 1e-9;

struct FusionWeights {
  double sampled = 0.0;
  double analytic = 0.0;

  /// False when neither description carries any proximity information.
  bool has_information() const { return sampled > 0.0 || analytic > 0.0; }
};

/// Mixed-scene state at one query point. All references use the
/// toward-obstacle convention of the sampled path except `analytic_reference`.
struct MixedFrame {
  FusionWeights weights;
  Vec2 sampled_reference = Vec2::Zero();   // toward the points
  Vec2 analytic_reference = Vec2::Zero();  // averaged, obstacle -> agent
  Vec2 analytic_normal_offset = Vec2::Zero();
  double analytic_magnitude = 0.0;         // extended, see extended_analytic_magnitude
  Vec2 mixed_reference = Vec2::Zero();
  Vec2 total_velocity = Vec2::Zero();      // weighted analytic obstacle velocity
  Vec2 damped_velocity = Vec2::Zero();     // analytic weight * total velocity
  bool identity = true;                    // M = I (no information or cancellation)
  Vec2 reference = Vec2::Zero();           // unit, obstacle -> agent
  Vec2 normal = Vec2::Zero();              // outward, unit
  EigenPair eigenvalues;
  std::size_t retained_points = 0;
};

struct MixedOptions {
  bool tail_negligence = true;
  /// Skip pruning when the caller already removed covered points.
  bool prune = true;
};

/// True when the point lies inside or on some analytic obstacle.
bool is_covered_by_obstacle(const Vec2& point, std::span<const StarObstacle> obstacles);

/// Drops scan points already described by an analytic obstacle.
ScanPointSet prune_points(const ScanPointSet& scan, std::span<const StarObstacle> obstacles);

/// Normalized importance of the two descriptions. Below one both follow
/// 1/(1-n) - 1; a saturated side dominates an unsaturated one; when both are
/// saturated they share by their excess over one.
FusionWeights fusion_weights(double sampled_reference_norm, double analytic_reference_norm);

/// |r_o| scaled by the raw weight sum to the power 1/s once that sum exceeds
/// one, so the analytic proximity keeps growing toward contact like the
/// sampled magnitude does.
double extended_analytic_magnitude(const Vec2& averaged_reference, double raw_sum,
                                   const AgentConfig& config);

/// r^m = w^p r_p + w^o (-r_o); the analytic reference is flipped to point toward the obstacle.
Vec2 mixed_reference(const FusionWeights& weights, const Vec2& sampled_reference,
                     const Vec2& analytic_reference);

/// Distance scaling that gives sampled and analytic descriptions equal importance.
double importance_scaling(double sampling_angle, int dimension);

MixedFrame mixed_frame(const Vec2& x, const Vec2& nominal, const ScanPointSet& scan,
                       std::span<const StarObstacle> obstacles, const AgentConfig& config,
                       const MixedOptions& options = {});

/// Fused avoidance of scan points and (possibly moving) analytic obstacles.
Vec2 modulate_mixed(const Vec2& x, const Vec2& nominal, const ScanPointSet& scan,
                    std::span<const StarObstacle> obstacles, const AgentConfig& config,
                    const MixedOptions& options = {});

/// Same modulation matrix applied to an arbitrary vector (for checks and plots).
Vec2 apply_mixed_matrix(const MixedFrame& frame, const Vec2& v);

}  // namespace fastmod
