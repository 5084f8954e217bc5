#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fastmod/control_runtime.hpp"

namespace fastmod {

/// Range-sensor model mounted at the control point, aligned with the heading.
struct ScanSpec {
  double sampling_angle = 7e-3;  // delta [rad]
  double fov_min = -kPi;         // [rad], relative to the heading
  double fov_max = kPi;
  double max_range = 10.0;       // [m]
  double noise = 0.0;            // range standard deviation [m]

  /// Beam count over [fov_min, fov_max) at the configured increment.
  std::size_t beam_count() const;
};

/// World obstacle. Tracked obstacles are also known analytically in mixed mode.
struct WorldObstacle {
  StarObstacle obstacle;
  bool tracked = false;
  double track_margin = 0.0;  // m added to the reported analytic model

  /// Analytic model as reported by the tracker.
  StarObstacle track() const { return track_margin > 0.0 ? obstacle.inflated(track_margin) : obstacle; }
};

/// Nearest intersection distance of the ray origin + t dir (t >= 0, dir unit)
/// with the inflated surface, if any.
std::optional<double> ray_cast(const StarObstacle& obstacle, const Vec2& origin, const Vec2& dir);

/// Nearest hit over all obstacles, up to max_range.
std::optional<double> ray_cast(std::span<const WorldObstacle> world, const Vec2& origin,
                               const Vec2& dir, double max_range);

/// Surface points seen from `pose` (world frame). Beams without a hit within
/// max_range are dropped. `rng` is only consumed when noise > 0.
ScanPointSet synthesize_scan(std::span<const WorldObstacle> world, const Pose& sensor_pose,
                             const ScanSpec& spec, double timestamp, std::mt19937_64* rng = nullptr);

/// Four wall segments (boxes of the given thickness) enclosing the rectangle.
std::vector<WorldObstacle> bounding_wall(double x_min, double y_min, double x_max, double y_max,
                                         double thickness = 0.2);

/// Minimum over obstacles of signed surface distance minus the agent radius.
double true_clearance(std::span<const WorldObstacle> world, const Vec2& x, double agent_radius);

/// World with every obstacle advanced by its rigid-body motion to time t.
std::vector<WorldObstacle> world_at(std::span<const WorldObstacle> world, double t);

enum class Integrator { kRK4, kEuler };

struct IntegratorSpec {
  double dt = 0.01;        // s
  Integrator scheme = Integrator::kRK4;
  double duration = 60.0;  // s
  /// Split control ticks so that no substep travels more than a quarter of
  /// the modelled clearance.
  bool adaptive = true;
};

/// Operator command held from time `t` until the next segment.
struct ScriptSegment {
  double t = 0.0;
  Vec2 velocity = Vec2::Zero();
};

/// Nominal dynamics: linear attraction, or a scripted operator command.
struct NominalSpec {
  std::optional<Vec2> attractor;
  double gain = 1.0;       // 1/s
  double max_speed = 1.0;  // m/s, 0 disables clipping
  std::vector<ScriptSegment> script;

  Vec2 evaluate(const Vec2& x, double t) const;
};

struct Scenario {
  std::string name = "scenario";
  std::vector<WorldObstacle> obstacles;
  AgentConfig agent;
  Pose start;
  NominalSpec nominal;
  ScanSpec scan;
  IntegratorSpec integrator;
  std::uint64_t seed = 0;
  AvoidanceMode mode = AvoidanceMode::kMixed;
  bool tail_negligence = true;
  /// Channel update periods in seconds; 0 means every control tick.
  double scan_period = 0.0;
  double tracker_period = 0.0;
  /// Sharpest corner assumed by the missed-edge margin of the sampled path.
  double min_obstacle_angle = kPi / 3.0;
  /// Actuation limit on the control-point speed of the plant [m/s], 0 = none.
  /// Only the magnitude is clipped; the commanded direction is kept.
  double max_speed = 0.0;
  bool record_trajectory = true;
};

enum class Outcome { kConverged, kLocalMinimum, kCollision, kTimeout };

std::string_view outcome_name(Outcome outcome);

/// Thresholds of the outcome classification.
inline constexpr double kConvergenceRadius = 0.01;   // m
inline constexpr double kStallSpeed = 1e-4;          // m/s
inline constexpr double kStallDuration = 2.0;        // s
inline constexpr double kStallMinDistance = 0.05;    // m
inline constexpr double kCollisionTolerance = 1e-4;  // m

struct RolloutResult {
  Outcome outcome = Outcome::kTimeout;
  std::vector<ControlTick> trajectory;
  double time_to_converge = 0.0;  // s, only meaningful when converged
  double min_clearance = 0.0;     // m, true geometry
  double duration = 0.0;          // simulated seconds
  std::size_t steps = 0;
  Pose final_pose;
  std::size_t contact_ticks = 0;  // ticks where the runtime reported contact
};

/// Plant, sensors, and controller advanced together one control tick at a
/// time. The nominal comes from the scenario (attractor or script) or, with
/// operator input, from the runtime mailbox.
class ClosedLoop {
 public:
  explicit ClosedLoop(Scenario scenario, bool operator_input = false);
  ClosedLoop(const ClosedLoop&) = delete;
  ClosedLoop& operator=(const ClosedLoop&) = delete;

  const Scenario& scenario() const { return scenario_; }
  const Pose& pose() const { return pose_; }
  double time() const { return static_cast<double>(tick_) * scenario_.integrator.dt; }
  std::size_t ticks() const { return tick_; }
  ControlRuntime& runtime() { return runtime_; }
  const ControlRuntime& runtime() const { return runtime_; }

  std::vector<WorldObstacle> world() const;
  /// True clearance of the control point at the current time.
  double clearance() const;
  /// Scan sensed at the start of the last tick.
  const ScanPointSet& last_scan() const { return last_scan_; }

  /// Replaces scan synthesis by recorded data (world-frame points at time t).
  void set_scan_source(std::function<ScanPointSet(double)> source) { scan_source_ = std::move(source); }

  /// Senses, evaluates, and integrates over one control period. The returned
  /// tick describes the state at the start of the period.
  ControlTick step();

 private:
  PreparedInputs sense(double now, const Pose& pose, bool force);

  Scenario scenario_;
  bool operator_input_;
  ControlRuntime runtime_;
  std::mt19937_64 rng_;
  Pose pose_;
  std::size_t tick_ = 0;
  double last_scan_time_;
  double last_track_time_;
  ScanPointSet last_scan_;
  std::function<ScanPointSet(double)> scan_source_;
};

RolloutResult rollout(const Scenario& scenario);

/// Sampled-mode rollout against recorded scans instead of a world. Each scan
/// is held from its timestamp until the next one; a single scan is a frozen
/// (static) replay. Collision means contact with the recorded points.
RolloutResult replay(std::span<const ScanPointSet> scans, const Scenario& scenario);

struct GridSpec {
  Vec2 lower{-5.0, -5.0};
  Vec2 upper{5.0, 5.0};
  std::size_t nx = 41;
  std::size_t ny = 41;
};

struct FieldNode {
  Vec2 position = Vec2::Zero();
  Vec2 nominal = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  bool inside = false;  // within the agent radius of a modelled surface; not evaluated
};

struct FieldGrid {
  GridSpec grid;
  AvoidanceMode mode = AvoidanceMode::kMixed;
  std::vector<FieldNode> nodes;  // row-major, x fastest
  ScanPointSet scan;             // sampled data used, if any
};

/// Modulated vector field of the scenario at t = 0 in its configured mode.
/// Sampled data is one scan taken from the start pose.
FieldGrid evaluate_field(const Scenario& scenario, const GridSpec& grid);

/// Random non-overlapping star obstacles inside a box, at least `keep_out`
/// away from every point in `keep_clear`.
struct RandomWorldSpec {
  Vec2 lower{-4.0, -4.0};
  Vec2 upper{4.0, 4.0};
  int min_obstacles = 1;
  int max_obstacles = 6;
  double min_size = 0.2;
  double max_size = 1.2;
  double min_separation = 0.05;
};
std::vector<StarObstacle> random_star_world(std::mt19937_64& rng, const RandomWorldSpec& spec,
                                            std::span<const Vec2> keep_clear, double keep_out);

/// One random star obstacle (ellipse, circle, or convex polygon) centered at `center`.
StarObstacle random_star_obstacle(std::mt19937_64& rng, const Vec2& center, double min_size,
                                  double max_size);

/// Scene of the convergence comparison: two random ellipses (top right and
/// bottom left), two fixed squares, and a surrounding wall.
struct ConvergenceScene {
  std::vector<WorldObstacle> obstacles;  // squares are the tracked ones
  Pose start;
  Vec2 attractor = Vec2::Zero();
};
ConvergenceScene convergence_scene(std::uint64_t seed, std::size_t run);

struct ExperimentRow {
  std::size_t run = 0;
  Outcome sampled = Outcome::kTimeout;
  Outcome disparate = Outcome::kTimeout;
  double sampled_time = 0.0;
  double disparate_time = 0.0;
};

struct ConvergenceTable {
  std::vector<ExperimentRow> rows;
  double sampled_ratio = 0.0;
  double disparate_ratio = 0.0;
  std::size_t joint_converged = 0;
  double sampled_mean_time = 0.0;    // over jointly converged runs
  double disparate_mean_time = 0.0;
  std::size_t sampled_collisions = 0;
  std::size_t disparate_collisions = 0;
};

struct ExperimentOptions {
  IntegratorSpec integrator{0.01, Integrator::kRK4, 30.0, true};
  double max_speed = 1.0;
  ScanSpec scan{0.02};
  AgentConfig agent;
  bool tail_negligence = true;
  unsigned threads = 1;
};

/// Scenario of one experiment run in the given mode (kSampled or kMixed).
Scenario convergence_scenario(std::uint64_t seed, std::size_t run, AvoidanceMode mode,
                              const ExperimentOptions& options);

ConvergenceTable convergence_experiment(std::size_t n_runs, std::uint64_t seed,
                                        const ExperimentOptions& options = {});

}  // namespace fastmod
