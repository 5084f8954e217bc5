#include "fastmod/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace fastmod {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Entry distance of the ray into a disc, nullopt when missed. Origin inside gives 0.
std::optional<double> ray_disc(const Vec2& o, const Vec2& d, const Vec2& c, double r) {
  const Vec2 oc = o - c;
  const double b = oc.dot(d);
  const double cc = oc.squaredNorm() - r * r;
  if (cc <= 0.0) return 0.0;
  if (b >= 0.0) return std::nullopt;
  const double disc = b * b - cc;
  if (disc < 0.0) return std::nullopt;
  return cc / (-b + std::sqrt(disc));
}

// Interval of the ray inside a disc, [t0, t1]; nullopt when missed.
std::optional<std::pair<double, double>> ray_disc_interval(const Vec2& o, const Vec2& d,
                                                           const Vec2& c, double r) {
  const Vec2 oc = o - c;
  const double b = oc.dot(d);
  const double cc = oc.squaredNorm() - r * r;
  const double disc = b * b - cc;
  if (disc < 0.0) return std::nullopt;
  const double s = std::sqrt(disc);
  if (-b + s < 0.0) return std::nullopt;
  return std::make_pair(-b - s, -b + s);
}

std::optional<double> ray_ellipse(const Vec2& o, const Vec2& d, double a, double b) {
  const Vec2 os(o.x() / a, o.y() / b);
  const Vec2 ds(d.x() / a, d.y() / b);
  const double A = ds.squaredNorm();
  const double B = os.dot(ds);
  const double C = os.squaredNorm() - 1.0;
  if (C <= 0.0) return 0.0;
  if (B >= 0.0) return std::nullopt;
  const double disc = B * B - A * C;
  if (disc < 0.0) return std::nullopt;
  return C / (-B + std::sqrt(disc));
}

Vec2 outward_normal(const Vec2& from, const Vec2& to) {
  const Vec2 e = (to - from).normalized();
  return {e.y(), -e.x()};
}

std::optional<double> ray_polygon(const Vec2& o, const Vec2& d, const std::vector<Vec2>& vertices) {
  double t_enter = -kInf;
  double t_exit = kInf;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 normal = outward_normal(vertices[i], vertices[(i + 1) % n]);
    const double num = normal.dot(vertices[i] - o);
    const double den = normal.dot(d);
    if (den == 0.0) {
      if (num < 0.0) return std::nullopt;
    } else if (den > 0.0) {
      t_exit = std::min(t_exit, num / den);
    } else {
      t_enter = std::max(t_enter, num / den);
    }
    if (t_enter > t_exit) return std::nullopt;
  }
  if (t_exit < 0.0) return std::nullopt;
  return std::max(t_enter, 0.0);
}

std::optional<double> ray_segment(const Vec2& o, const Vec2& d, const Vec2& p, const Vec2& q) {
  const Vec2 e = q - p;
  const double den = cross(d, e);
  if (den == 0.0) return std::nullopt;
  const Vec2 w = p - o;
  const double t = cross(w, e) / den;
  const double u = cross(w, d) / den;
  if (t < 0.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return t;
}

std::optional<double> ray_rounded_polygon(const Vec2& o, const Vec2& d,
                                          const std::vector<Vec2>& vertices, double margin) {
  std::optional<double> best;
  const auto take = [&](std::optional<double> t) {
    if (t && (!best || *t < *best)) best = t;
  };
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = vertices[i];
    const Vec2& q = vertices[(i + 1) % n];
    const Vec2 shift = margin * outward_normal(p, q);
    take(ray_segment(o, d, p + shift, q + shift));
    take(ray_disc(o, d, p, margin));
  }
  return best;
}

// Sphere tracing on the exact signed distance; used for inflated ellipses.
std::optional<double> ray_march(const StarObstacle& obstacle, const Vec2& origin, const Vec2& dir) {
  const auto span = ray_disc_interval(origin, dir, obstacle.center(), obstacle.bounding_radius());
  if (!span) return std::nullopt;
  double t = std::max(span->first, 0.0);
  for (int i = 0; i < 500 && t <= span->second; ++i) {
    const double sd = obstacle.signed_distance(origin + t * dir);
    if (sd <= 1e-12) return t;
    t += sd;
  }
  return std::nullopt;
}

constexpr double kSubstepFraction = 0.25;
constexpr double kMinSubstep = 1.0 / 64.0;

// Distance to the nearest modelled surface: scan points and inflated obstacles.
double modelled_clearance(const PreparedInputs& inputs, const Vec2& x, double radius) {
  double nearest = kInf;
  for (const Vec2& p : inputs.scan.points) nearest = std::min(nearest, (p - x).squaredNorm());
  double c = std::sqrt(nearest) - radius;
  for (const StarObstacle& o : inputs.obstacles) c = std::min(c, o.signed_distance(x));
  return c;
}

Vec2 uniform_in(std::mt19937_64& rng, const Vec2& lower, const Vec2& upper) {
  std::uniform_real_distribution<double> ux(lower.x(), upper.x());
  std::uniform_real_distribution<double> uy(lower.y(), upper.y());
  const double x = ux(rng);
  return {x, uy(rng)};
}

}  // namespace

std::size_t ScanSpec::beam_count() const {
  if (!(sampling_angle > 0.0) || !(fov_max > fov_min)) return 0;
  return static_cast<std::size_t>(std::ceil((fov_max - fov_min) / sampling_angle - 1e-9));
}

std::optional<double> ray_cast(const StarObstacle& obstacle, const Vec2& origin, const Vec2& dir) {
  const Vec2 o = obstacle.to_body(origin);
  const Vec2 d = obstacle.direction_to_body(dir);
  const double margin = obstacle.margin();
  const Shape& shape = obstacle.shape();
  if (const auto* c = std::get_if<Circle>(&shape)) return ray_disc(o, d, Vec2::Zero(), c->radius + margin);
  if (const auto* e = std::get_if<Ellipse>(&shape)) {
    if (margin == 0.0) return ray_ellipse(o, d, e->semi_axis_a, e->semi_axis_b);
    return ray_march(obstacle, origin, dir);
  }
  const auto& vertices = std::get<ConvexPolygon>(shape).vertices;
  if (margin == 0.0) return ray_polygon(o, d, vertices);
  if (obstacle.signed_distance(origin) <= 0.0) return 0.0;
  return ray_rounded_polygon(o, d, vertices, margin);
}

std::optional<double> ray_cast(std::span<const WorldObstacle> world, const Vec2& origin,
                               const Vec2& dir, double max_range) {
  double best = max_range;
  bool hit = false;
  for (const WorldObstacle& w : world) {
    // Cheap rejection against the bounding circle.
    const Vec2 oc = w.obstacle.center() - origin;
    const double along = oc.dot(dir);
    const double r = w.obstacle.bounding_radius();
    const double lateral2 = oc.squaredNorm() - along * along;
    if (lateral2 > r * r) continue;
    if (along + r < 0.0 || along - r > best) continue;
    if (const auto t = ray_cast(w.obstacle, origin, dir); t && *t <= best) {
      best = *t;
      hit = true;
    }
  }
  if (!hit) return std::nullopt;
  return best;
}

ScanPointSet synthesize_scan(std::span<const WorldObstacle> world, const Pose& sensor_pose,
                             const ScanSpec& spec, double timestamp, std::mt19937_64* rng) {
  ScanPointSet scan;
  scan.timestamp = timestamp;
  scan.sampling_angle = spec.sampling_angle;
  const std::size_t beams = spec.beam_count();
  scan.points.reserve(beams);
  const Vec2 origin = sensor_pose.position();
  std::normal_distribution<double> noise(0.0, spec.noise > 0.0 ? spec.noise : 1.0);
  for (std::size_t i = 0; i < beams; ++i) {
    const double angle = sensor_pose.theta + spec.fov_min + static_cast<double>(i) * spec.sampling_angle;
    const Vec2 dir(std::cos(angle), std::sin(angle));
    auto range = ray_cast(world, origin, dir, spec.max_range);
    if (!range) continue;
    double r = *range;
    if (spec.noise > 0.0 && rng != nullptr) r = std::max(0.0, r + noise(*rng));
    if (r >= spec.max_range) continue;
    scan.points.push_back(origin + r * dir);
  }
  return scan;
}

std::vector<WorldObstacle> bounding_wall(double x_min, double y_min, double x_max, double y_max,
                                         double thickness) {
  const double w = x_max - x_min;
  const double h = y_max - y_min;
  const double t = thickness;
  const double cx = 0.5 * (x_min + x_max);
  const double cy = 0.5 * (y_min + y_max);
  std::vector<WorldObstacle> wall;
  wall.push_back({StarObstacle::box({cx, y_max + 0.5 * t}, w + 2.0 * t, t), false});
  wall.push_back({StarObstacle::box({cx, y_min - 0.5 * t}, w + 2.0 * t, t), false});
  wall.push_back({StarObstacle::box({x_min - 0.5 * t, cy}, t, h), false});
  wall.push_back({StarObstacle::box({x_max + 0.5 * t, cy}, t, h), false});
  return wall;
}

double true_clearance(std::span<const WorldObstacle> world, const Vec2& x, double agent_radius) {
  double best = kInf;
  for (const WorldObstacle& w : world) best = std::min(best, w.obstacle.signed_distance(x));
  return best - agent_radius;
}

std::vector<WorldObstacle> world_at(std::span<const WorldObstacle> world, double t) {
  std::vector<WorldObstacle> out;
  out.reserve(world.size());
  for (const WorldObstacle& w : world) out.push_back({w.obstacle.advanced(t), w.tracked, w.track_margin});
  return out;
}

Vec2 NominalSpec::evaluate(const Vec2& x, double t) const {
  Vec2 v = Vec2::Zero();
  if (attractor) {
    v = -gain * (x - *attractor);
  } else {
    for (const ScriptSegment& s : script) {
      if (s.t <= t) v = s.velocity;
    }
  }
  const double speed = v.norm();
  if (max_speed > 0.0 && speed > max_speed) v *= max_speed / speed;
  return v;
}

std::string_view outcome_name(Outcome outcome) {
  switch (outcome) {
    case Outcome::kConverged: return "converged";
    case Outcome::kLocalMinimum: return "local-minimum";
    case Outcome::kCollision: return "collision";
    case Outcome::kTimeout: return "timeout";
  }
  return "unknown";
}

namespace {

RuntimeOptions runtime_options(const Scenario& s) {
  RuntimeOptions options;
  options.mode = s.mode;
  options.tail_negligence = s.tail_negligence;
  options.min_obstacle_angle = s.min_obstacle_angle;
  return options;
}

StalenessLimits staleness_limits(const Scenario& s) {
  StalenessLimits limits;
  limits.scan = std::max(limits.scan, 2.0 * s.scan_period);
  limits.obstacles = std::max(limits.obstacles, 2.0 * s.tracker_period);
  return limits;
}

const Scenario& validated(const Scenario& s) {
  if (!(s.integrator.dt > 0.0)) throw Error(ErrorKind::kInvalidConfig, "integrator dt must be positive");
  return s;
}

}  // namespace

ClosedLoop::ClosedLoop(Scenario scenario, bool operator_input)
    : scenario_(std::move(validated(scenario))),
      operator_input_(operator_input),
      runtime_(scenario_.agent, runtime_options(scenario_), staleness_limits(scenario_)),
      rng_(scenario_.seed),
      pose_(scenario_.start),
      last_scan_time_(-kInf),
      last_track_time_(-kInf) {}

std::vector<WorldObstacle> ClosedLoop::world() const { return world_at(scenario_.obstacles, time()); }

double ClosedLoop::clearance() const {
  return true_clearance(world(), control_point(pose_, scenario_.agent.control_point_offset),
                        scenario_.agent.radius);
}

PreparedInputs ClosedLoop::sense(double now, const Pose& pose, bool force) {
  const bool uses_scan = scenario_.mode != AvoidanceMode::kAnalytic;
  const bool uses_tracks = scenario_.mode != AvoidanceMode::kSampled;
  const double eps = 1e-9 * scenario_.integrator.dt;
  const std::vector<WorldObstacle> w = world_at(scenario_.obstacles, now);
  if (uses_scan && (force || now - last_scan_time_ >= scenario_.scan_period - eps)) {
    const Vec2 sensor = control_point(pose, scenario_.agent.control_point_offset);
    ScanPointSet scan = scan_source_ ? scan_source_(now)
                                     : synthesize_scan(w, Pose{sensor.x(), sensor.y(), pose.theta},
                                                       scenario_.scan, now, &rng_);
    if (!force) last_scan_ = scan;
    runtime_.mailbox().push_scan(std::move(scan), now);
    last_scan_time_ = now;
  }
  if (uses_tracks && (force || now - last_track_time_ >= scenario_.tracker_period - eps)) {
    std::vector<StarObstacle> tracks;
    for (const WorldObstacle& o : w) {
      if (scenario_.mode == AvoidanceMode::kAnalytic || o.tracked) tracks.push_back(o.track());
    }
    runtime_.mailbox().push_obstacles(std::move(tracks), now);
    last_track_time_ = now;
  }
  return runtime_.prepare(runtime_.mailbox().snapshot(now));
}

ControlTick ClosedLoop::step() {
  const double dt = scenario_.integrator.dt;
  const double t = time();
  const double dc = scenario_.agent.control_point_offset;
  const double eps = 1e-9 * dt;
  const bool uses_tracks = scenario_.mode != AvoidanceMode::kSampled;
  // Substeps of a refined tick re-sense when every channel runs at the control rate.
  const bool resense =
      scenario_.scan_period <= 0.0 && (scenario_.tracker_period <= 0.0 || !uses_tracks);
  const double sensing_radius = runtime_.sampled_config(scenario_.scan.sampling_angle).radius;

  PreparedInputs inputs = sense(t, pose_, false);
  std::optional<Vec2> held;
  bool stale = false;
  if (operator_input_) {
    held = runtime_.mailbox().snapshot(t).nominal;
    stale = !held;
  }

  struct Derivative {
    double x, y, theta;
    Evaluation eval;
    Vec2 nominal;
  };
  double now = t;
  const auto field = [&](const Pose& p) {
    const Vec2 x = control_point(p, dc);
    Derivative d{0.0, 0.0, 0.0, Evaluation{}, Vec2::Zero()};
    if (operator_input_) {
      if (stale) return d;
      d.nominal = *held;
    } else {
      d.nominal = scenario_.nominal.evaluate(x, now);
    }
    d.eval = runtime_.evaluate(inputs, x, d.nominal);
    Vec2 v = d.eval.velocity;
    if (const double speed = v.norm(); scenario_.max_speed > 0.0 && speed > scenario_.max_speed) {
      v *= scenario_.max_speed / speed;
    }
    if (dc > 0.0) {
      const WheelCommand cmd = to_wheel_command(rotate(v, -p.theta), dc);
      d.x = cmd.linear * std::cos(p.theta);
      d.y = cmd.linear * std::sin(p.theta);
      d.theta = cmd.angular;
    } else {
      d.x = v.x();
      d.y = v.y();
    }
    return d;
  };
  const auto shifted = [](const Pose& p, const Derivative& d, double h) {
    return Pose{p.x + h * d.x, p.y + h * d.y, p.theta + h * d.theta};
  };

  const Derivative k1 = field(pose_);
  ControlTick tick = runtime_.make_tick(pose_, t, inputs, k1.nominal, k1.eval);
  tick.stale_nominal = stale;

  // Substeps never cover more than a fraction of the modelled clearance.
  double remaining = dt;
  Derivative d1 = k1;
  while (remaining > 0.0) {
    double h = remaining;
    const double speed = d1.eval.velocity.norm();
    if (scenario_.integrator.adaptive && speed > 0.0) {
      const double c = modelled_clearance(inputs, control_point(pose_, dc), sensing_radius);
      h = std::min(h, std::max(kSubstepFraction * std::max(c, 0.0) / speed, dt * kMinSubstep));
    }
    if (scenario_.integrator.scheme == Integrator::kEuler) {
      pose_ = shifted(pose_, d1, h);
    } else {
      const Derivative d2 = field(shifted(pose_, d1, 0.5 * h));
      const Derivative d3 = field(shifted(pose_, d2, 0.5 * h));
      const Derivative d4 = field(shifted(pose_, d3, h));
      pose_.x += h / 6.0 * (d1.x + 2.0 * d2.x + 2.0 * d3.x + d4.x);
      pose_.y += h / 6.0 * (d1.y + 2.0 * d2.y + 2.0 * d3.y + d4.y);
      pose_.theta += h / 6.0 * (d1.theta + 2.0 * d2.theta + 2.0 * d3.theta + d4.theta);
    }
    remaining -= h;
    if (remaining <= eps) break;
    now = t + (dt - remaining);
    if (resense) inputs = sense(now, pose_, true);
    d1 = field(pose_);
  }
  pose_.theta = wrap_angle(pose_.theta);
  ++tick_;
  return tick;
}

RolloutResult rollout(const Scenario& scenario) {
  ClosedLoop loop(scenario);
  const double dt = scenario.integrator.dt;
  const auto steps = static_cast<std::size_t>(std::llround(scenario.integrator.duration / dt));
  const double dc = scenario.agent.control_point_offset;
  const double eps = 1e-9 * dt;

  RolloutResult result;
  result.min_clearance = kInf;
  double stall = 0.0;
  for (;;) {
    const double t = loop.time();
    const Vec2 cp = control_point(loop.pose(), dc);
    const double clearance = loop.clearance();
    result.min_clearance = std::min(result.min_clearance, clearance);
    result.final_pose = loop.pose();
    result.duration = t;
    result.steps = loop.ticks();
    if (clearance < -kCollisionTolerance) {
      result.outcome = Outcome::kCollision;
      break;
    }
    const double goal_distance =
        scenario.nominal.attractor ? (cp - *scenario.nominal.attractor).norm() : kInf;
    if (goal_distance < kConvergenceRadius) {
      result.outcome = Outcome::kConverged;
      result.time_to_converge = t;
      break;
    }
    if (loop.ticks() >= steps) {
      result.outcome = Outcome::kTimeout;
      break;
    }
    ControlTick tick = loop.step();
    if (tick.collision) ++result.contact_ticks;
    const bool slow = tick.velocity.norm() < kStallSpeed;
    if (scenario.record_trajectory) result.trajectory.push_back(std::move(tick));
    if (scenario.nominal.attractor && slow && goal_distance > kStallMinDistance) {
      stall += dt;
      if (stall >= kStallDuration - eps) {
        result.outcome = Outcome::kLocalMinimum;
        result.final_pose = loop.pose();
        result.duration = loop.time();
        result.steps = loop.ticks();
        break;
      }
    } else {
      stall = 0.0;
    }
  }
  return result;
}

RolloutResult replay(std::span<const ScanPointSet> scans, const Scenario& scenario) {
  Scenario s = scenario;
  s.mode = AvoidanceMode::kSampled;
  s.obstacles.clear();
  s.scan_period = 0.0;
  std::vector<ScanPointSet> ordered(scans.begin(), scans.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const ScanPointSet& a, const ScanPointSet& b) { return a.timestamp < b.timestamp; });
  if (!ordered.empty()) s.scan.sampling_angle = ordered.front().sampling_angle;
  const auto held = [&](double t) -> const ScanPointSet* {
    const ScanPointSet* current = ordered.empty() ? nullptr : &ordered.front();
    for (const ScanPointSet& scan : ordered) {
      if (scan.timestamp <= t) current = &scan;
    }
    return current;
  };
  ClosedLoop loop(s);
  loop.set_scan_source([&](double t) {
    ScanPointSet scan = held(t) ? *held(t) : ScanPointSet{};
    scan.timestamp = t;
    return scan;
  });

  const double dt = s.integrator.dt;
  const auto steps = static_cast<std::size_t>(std::llround(s.integrator.duration / dt));
  const double dc = s.agent.control_point_offset;
  const double eps = 1e-9 * dt;
  RolloutResult result;
  result.min_clearance = kInf;
  double stall = 0.0;
  for (;;) {
    const double t = loop.time();
    const Vec2 cp = control_point(loop.pose(), dc);
    double clearance = kInf;
    if (const ScanPointSet* scan = held(t)) {
      for (const Vec2& p : scan->points) clearance = std::min(clearance, (p - cp).norm());
      clearance -= s.agent.radius;
    }
    result.min_clearance = std::min(result.min_clearance, clearance);
    result.final_pose = loop.pose();
    result.duration = t;
    result.steps = loop.ticks();
    if (!(clearance > 0.0)) {
      result.outcome = Outcome::kCollision;
      break;
    }
    const double goal_distance = s.nominal.attractor ? (cp - *s.nominal.attractor).norm() : kInf;
    if (goal_distance < kConvergenceRadius) {
      result.outcome = Outcome::kConverged;
      result.time_to_converge = t;
      break;
    }
    if (loop.ticks() >= steps) {
      result.outcome = Outcome::kTimeout;
      break;
    }
    ControlTick tick = loop.step();
    if (tick.collision) ++result.contact_ticks;
    const bool slow = tick.velocity.norm() < kStallSpeed;
    if (s.record_trajectory) result.trajectory.push_back(std::move(tick));
    if (s.nominal.attractor && slow && goal_distance > kStallMinDistance) {
      stall += dt;
      if (stall >= kStallDuration - eps) {
        result.outcome = Outcome::kLocalMinimum;
        break;
      }
    } else {
      stall = 0.0;
    }
  }
  return result;
}

FieldGrid evaluate_field(const Scenario& scenario, const GridSpec& grid) {
  if (grid.nx < 1 || grid.ny < 1 || !(grid.upper.x() >= grid.lower.x()) ||
      !(grid.upper.y() >= grid.lower.y())) {
    throw Error(ErrorKind::kInvalidConfig, "grid needs at least one node and ordered bounds");
  }
  RuntimeOptions options = runtime_options(scenario);
  ControlRuntime runtime(scenario.agent, options);
  FieldGrid field;
  field.grid = grid;
  field.mode = scenario.mode;
  const std::vector<WorldObstacle>& world = scenario.obstacles;
  if (scenario.mode != AvoidanceMode::kAnalytic) {
    const Vec2 sensor = control_point(scenario.start, scenario.agent.control_point_offset);
    std::mt19937_64 rng(scenario.seed);
    field.scan = synthesize_scan(world, Pose{sensor.x(), sensor.y(), scenario.start.theta}, scenario.scan,
                                 0.0, &rng);
    runtime.mailbox().push_scan(field.scan, 0.0);
  }
  if (scenario.mode != AvoidanceMode::kSampled) {
    std::vector<StarObstacle> tracks;
    for (const WorldObstacle& w : world) {
      if (scenario.mode == AvoidanceMode::kAnalytic || w.tracked) tracks.push_back(w.track());
    }
    runtime.mailbox().push_obstacles(std::move(tracks), 0.0);
  }
  const PreparedInputs inputs = runtime.prepare(runtime.mailbox().snapshot(0.0));
  const double sensing_radius = runtime.sampled_config(scenario.scan.sampling_angle).radius;
  field.nodes.reserve(grid.nx * grid.ny);
  for (std::size_t j = 0; j < grid.ny; ++j) {
    for (std::size_t i = 0; i < grid.nx; ++i) {
      FieldNode node;
      const double fx = grid.nx > 1 ? static_cast<double>(i) / static_cast<double>(grid.nx - 1) : 0.5;
      const double fy = grid.ny > 1 ? static_cast<double>(j) / static_cast<double>(grid.ny - 1) : 0.5;
      node.position = grid.lower + Vec2(fx * (grid.upper.x() - grid.lower.x()),
                                        fy * (grid.upper.y() - grid.lower.y()));
      node.nominal = scenario.nominal.evaluate(node.position, 0.0);
      node.inside = modelled_clearance(inputs, node.position, sensing_radius) <= 0.0;
      if (!node.inside) {
        const Evaluation e = runtime.evaluate(inputs, node.position, node.nominal);
        node.inside = e.collision;
        node.velocity = e.collision ? Vec2::Zero() : e.velocity;
      }
      field.nodes.push_back(node);
    }
  }
  return field;
}

StarObstacle random_star_obstacle(std::mt19937_64& rng, const Vec2& center, double min_size,
                                  double max_size) {
  std::uniform_real_distribution<double> size(min_size, max_size);
  std::uniform_real_distribution<double> angle(0.0, kPi);
  std::uniform_int_distribution<int> kind(0, 2);
  switch (kind(rng)) {
    case 0: {
      const double a = size(rng);
      const double b = size(rng);
      return StarObstacle::ellipse(center, a, b, angle(rng));
    }
    case 1:
      return StarObstacle::circle(center, size(rng));
    default: {
      std::uniform_int_distribution<int> sides(3, 8);
      const int n = sides(rng);
      const double sx = size(rng);
      const double sy = size(rng);
      const double phase = angle(rng);
      std::vector<Vec2> vertices;
      for (int i = 0; i < n; ++i) {
        const double a = phase + 2.0 * kPi * i / n;
        vertices.emplace_back(sx * std::cos(a), sy * std::sin(a));
      }
      return StarObstacle::polygon(center, std::move(vertices), angle(rng));
    }
  }
}

std::vector<StarObstacle> random_star_world(std::mt19937_64& rng, const RandomWorldSpec& spec,
                                            std::span<const Vec2> keep_clear, double keep_out) {
  std::uniform_int_distribution<int> count(spec.min_obstacles, spec.max_obstacles);
  const int n = count(rng);
  std::vector<StarObstacle> world;
  for (int i = 0; i < n; ++i) {
    for (int attempt = 0; attempt < 200; ++attempt) {
      const Vec2 c = uniform_in(rng, spec.lower, spec.upper);
      StarObstacle candidate = random_star_obstacle(rng, c, spec.min_size, spec.max_size);
      const double r = candidate.bounding_radius();
      bool ok = true;
      for (const Vec2& p : keep_clear) ok = ok && candidate.signed_distance(p) > keep_out;
      for (const StarObstacle& o : world) {
        ok = ok && (o.center() - c).norm() > o.bounding_radius() + r + spec.min_separation;
      }
      if (ok) {
        world.push_back(std::move(candidate));
        break;
      }
    }
  }
  return world;
}

// Inflation of the tracker's reported model of the central boxes.
constexpr double kTrackMargin = 0.25;

ConvergenceScene convergence_scene(std::uint64_t seed, std::size_t run) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(run), 0x5eedu};
  std::mt19937_64 rng(seq);
  ConvergenceScene scene;
  scene.obstacles = bounding_wall(-5.0, -4.0, 5.0, 4.0, 0.3);
  scene.obstacles.push_back({StarObstacle::box({0.0, 1.2}, 1.8, 1.8), true, kTrackMargin});
  scene.obstacles.push_back({StarObstacle::box({0.0, -1.2}, 1.8, 1.8), true, kTrackMargin});
  scene.attractor = Vec2(4.0, 2.0);
  std::uniform_real_distribution<double> start_y(-3.0, 3.0);
  scene.start = Pose{-4.0, start_y(rng), 0.0};

  std::uniform_real_distribution<double> axis(0.3, 1.2);
  std::uniform_real_distribution<double> orientation(0.0, kPi);
  const Vec2 keep[2] = {scene.start.position(), scene.attractor};
  const auto place = [&](const Vec2& lower, const Vec2& upper) {
    for (int attempt = 0; attempt < 500; ++attempt) {
      const Vec2 c = uniform_in(rng, lower, upper);
      const double a = axis(rng);
      const double b = axis(rng);
      StarObstacle e = StarObstacle::ellipse(c, a, b, orientation(rng));
      bool ok = true;
      for (const Vec2& p : keep) ok = ok && e.signed_distance(p) > 0.8;
      for (const WorldObstacle& w : scene.obstacles) {
        // Ellipse and obstacle must not overlap: sample the ellipse boundary.
        for (int i = 0; i < 64 && ok; ++i) {
          const double phi = 2.0 * kPi * i / 64.0;
          const Vec2 p = e.to_world({a * std::cos(phi), b * std::sin(phi)});
          ok = w.obstacle.signed_distance(p) > 0.05;
        }
        ok = ok && w.obstacle.signed_distance(c) > 0.0;
      }
      if (ok) {
        scene.obstacles.push_back({std::move(e), false});
        return;
      }
    }
  };
  place({0.5, 0.5}, {4.5, 3.5});
  place({-4.5, -3.5}, {-0.5, -0.5});
  return scene;
}

Scenario convergence_scenario(std::uint64_t seed, std::size_t run, AvoidanceMode mode,
                              const ExperimentOptions& options) {
  const ConvergenceScene scene = convergence_scene(seed, run);
  Scenario sc;
  sc.name = "convergence-" + std::to_string(run);
  sc.obstacles = scene.obstacles;
  if (mode == AvoidanceMode::kSampled) {
    for (WorldObstacle& w : sc.obstacles) w.tracked = false;
  }
  sc.agent = options.agent;
  sc.start = scene.start;
  sc.nominal.attractor = scene.attractor;
  sc.scan = options.scan;
  sc.integrator = options.integrator;
  sc.max_speed = options.max_speed;
  sc.tail_negligence = options.tail_negligence;
  sc.seed = seed;
  sc.mode = mode;
  sc.record_trajectory = false;
  return sc;
}

ConvergenceTable convergence_experiment(std::size_t n_runs, std::uint64_t seed,
                                        const ExperimentOptions& options) {
  ConvergenceTable table;
  table.rows.resize(n_runs);
  if (n_runs == 0) return table;

  const auto work = [&](std::size_t run) {
    ExperimentRow& row = table.rows[run];
    row.run = run;
    const RolloutResult sampled =
        rollout(convergence_scenario(seed, run, AvoidanceMode::kSampled, options));
    const RolloutResult disparate =
        rollout(convergence_scenario(seed, run, AvoidanceMode::kMixed, options));
    row.sampled = sampled.outcome;
    row.disparate = disparate.outcome;
    row.sampled_time = sampled.time_to_converge;
    row.disparate_time = disparate.time_to_converge;
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, n_runs));
  if (threads == 1) {
    for (std::size_t i = 0; i < n_runs; ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n_runs; i += threads) work(i);
      });
    }
    for (std::thread& th : pool) th.join();
  }

  std::size_t sampled_ok = 0;
  std::size_t disparate_ok = 0;
  double sampled_time = 0.0;
  double disparate_time = 0.0;
  for (const ExperimentRow& row : table.rows) {
    const bool s = row.sampled == Outcome::kConverged;
    const bool d = row.disparate == Outcome::kConverged;
    sampled_ok += s;
    disparate_ok += d;
    table.sampled_collisions += row.sampled == Outcome::kCollision;
    table.disparate_collisions += row.disparate == Outcome::kCollision;
    if (s && d) {
      ++table.joint_converged;
      sampled_time += row.sampled_time;
      disparate_time += row.disparate_time;
    }
  }
  table.sampled_ratio = static_cast<double>(sampled_ok) / static_cast<double>(n_runs);
  table.disparate_ratio = static_cast<double>(disparate_ok) / static_cast<double>(n_runs);
  if (table.joint_converged > 0) {
    table.sampled_mean_time = sampled_time / static_cast<double>(table.joint_converged);
    table.disparate_mean_time = disparate_time / static_cast<double>(table.joint_converged);
  }
  return table;
}

}  // namespace fastmod
