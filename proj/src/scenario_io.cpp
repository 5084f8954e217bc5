#include "fastmod/scenario_io.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <type_traits>
#include <variant>

namespace fastmod {
namespace {

[[noreturn]] void schema_error(const std::string& pointer, const std::string& message) {
  throw Error(ErrorKind::kSchema, (pointer.empty() ? std::string("/") : pointer) + ": " + message);
}

std::string child(const std::string& pointer, std::string_view key) {
  return pointer + "/" + std::string(key);
}

std::string child(const std::string& pointer, std::size_t index) {
  return pointer + "/" + std::to_string(index);
}

const Json& require(const Json& j, const std::string& pointer, std::string_view key) {
  if (!j.is_object()) schema_error(pointer, "expected an object");
  const auto it = j.find(std::string(key));
  if (it == j.end()) schema_error(child(pointer, key), "missing required field");
  return *it;
}

const Json* optional_field(const Json& j, const std::string& pointer, std::string_view key) {
  if (!j.is_object()) schema_error(pointer, "expected an object");
  const auto it = j.find(std::string(key));
  return it == j.end() ? nullptr : &*it;
}

double number(const Json& j, const std::string& pointer) {
  if (!j.is_number()) schema_error(pointer, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) schema_error(pointer, "expected a finite number");
  return v;
}

double number_or(const Json& j, const std::string& pointer, std::string_view key, double fallback) {
  const Json* f = optional_field(j, pointer, key);
  return f ? number(*f, child(pointer, key)) : fallback;
}

bool bool_or(const Json& j, const std::string& pointer, std::string_view key, bool fallback) {
  const Json* f = optional_field(j, pointer, key);
  if (!f) return fallback;
  if (!f->is_boolean()) schema_error(child(pointer, key), "expected a boolean");
  return f->get<bool>();
}

std::vector<double> numbers(const Json& j, const std::string& pointer, std::size_t count) {
  if (!j.is_array() || j.size() != count) {
    schema_error(pointer, "expected an array of " + std::to_string(count) + " numbers");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(number(j[i], child(pointer, i)));
  return out;
}

Vec2 vec2(const Json& j, const std::string& pointer) {
  const auto v = numbers(j, pointer, 2);
  return {v[0], v[1]};
}

Vec2 vec2_or(const Json& j, const std::string& pointer, std::string_view key, Vec2 fallback) {
  const Json* f = optional_field(j, pointer, key);
  return f ? vec2(*f, child(pointer, key)) : fallback;
}

Json to_json(const Vec2& v) { return Json::array({v.x(), v.y()}); }

AgentConfig agent_from_json(const Json& j, const std::string& p) {
  AgentConfig a;
  a.radius = number_or(j, p, "radius", a.radius);
  a.gap_distance = number_or(j, p, "gap_distance", a.gap_distance);
  a.control_point_offset = number_or(j, p, "control_point_offset", a.control_point_offset);
  a.reactivity = number_or(j, p, "reactivity", a.reactivity);
  a.scaling_potential = number_or(j, p, "scaling_potential", a.scaling_potential);
  a.distance_scaling = number_or(j, p, "distance_scaling", a.distance_scaling);
  a.power_weight = number_or(j, p, "power_weight", a.power_weight);
  try {
    a.validate();
  } catch (const Error& e) {
    schema_error(p, e.what());
  }
  return a;
}

Json agent_to_json(const AgentConfig& a) {
  return {{"radius", a.radius},
          {"gap_distance", a.gap_distance},
          {"control_point_offset", a.control_point_offset},
          {"reactivity", a.reactivity},
          {"scaling_potential", a.scaling_potential},
          {"distance_scaling", a.distance_scaling},
          {"power_weight", a.power_weight}};
}

ScanSpec scan_from_json(const Json& j, const std::string& p, double* period) {
  ScanSpec s;
  s.sampling_angle = number_or(j, p, "delta", s.sampling_angle);
  if (const Json* fov = optional_field(j, p, "fov")) {
    const Vec2 f = vec2(*fov, child(p, "fov"));
    s.fov_min = f.x();
    s.fov_max = f.y();
    if (!(s.fov_max > s.fov_min)) schema_error(child(p, "fov"), "expected [min, max] with max > min");
  }
  s.max_range = number_or(j, p, "max_range", s.max_range);
  s.noise = number_or(j, p, "noise", s.noise);
  *period = number_or(j, p, "period", 0.0);
  if (!(s.sampling_angle > 0.0)) schema_error(child(p, "delta"), "must be positive");
  if (!(s.max_range > 0.0)) schema_error(child(p, "max_range"), "must be positive");
  if (s.noise < 0.0) schema_error(child(p, "noise"), "must be non-negative");
  return s;
}

IntegratorSpec integrator_from_json(const Json& j, const std::string& p) {
  IntegratorSpec s;
  s.dt = number_or(j, p, "dt", s.dt);
  s.duration = number_or(j, p, "duration", s.duration);
  s.adaptive = bool_or(j, p, "adaptive", s.adaptive);
  if (const Json* scheme = optional_field(j, p, "scheme")) {
    if (*scheme == "rk4") {
      s.scheme = Integrator::kRK4;
    } else if (*scheme == "euler") {
      s.scheme = Integrator::kEuler;
    } else {
      schema_error(child(p, "scheme"), "expected \"rk4\" or \"euler\"");
    }
  }
  if (!(s.dt > 0.0)) schema_error(child(p, "dt"), "must be positive");
  if (!(s.duration >= 0.0)) schema_error(child(p, "duration"), "must be non-negative");
  return s;
}

}  // namespace

std::string_view mode_name(AvoidanceMode mode) {
  switch (mode) {
    case AvoidanceMode::kAnalytic: return "analytic";
    case AvoidanceMode::kSampled: return "sampled";
    case AvoidanceMode::kMixed: return "mixed";
  }
  return "mixed";
}

AvoidanceMode parse_mode(std::string_view name) {
  if (name == "analytic") return AvoidanceMode::kAnalytic;
  if (name == "sampled") return AvoidanceMode::kSampled;
  if (name == "mixed") return AvoidanceMode::kMixed;
  throw Error(ErrorKind::kSchema, "unknown mode \"" + std::string(name) + "\"");
}

Json obstacle_to_json(const StarObstacle& o) {
  Json j;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ellipse>) {
          j["type"] = "ellipse";
          j["axes"] = Json::array({s.semi_axis_a, s.semi_axis_b});
        } else if constexpr (std::is_same_v<T, Circle>) {
          j["type"] = "circle";
          j["radius"] = s.radius;
        } else {
          j["type"] = "polygon";
          Json vertices = Json::array();
          for (const Vec2& v : s.vertices) vertices.push_back(to_json(v));
          j["vertices"] = std::move(vertices);
        }
      },
      o.shape());
  j["center"] = to_json(o.center());
  j["reference_point"] = to_json(o.reference_point());
  j["orientation"] = o.orientation();
  j["margin"] = o.margin();
  j["velocity"] = to_json(o.linear_velocity());
  j["angular_velocity"] = o.angular_velocity();
  return j;
}

StarObstacle obstacle_from_json(const Json& j, const std::string& p) {
  const Json& type = require(j, p, "type");
  if (!type.is_string()) schema_error(child(p, "type"), "expected a string");
  const std::string kind = type.get<std::string>();
  Shape shape;
  if (kind == "ellipse") {
    const Vec2 axes = vec2(require(j, p, "axes"), child(p, "axes"));
    if (!(axes.x() > 0.0 && axes.y() > 0.0)) schema_error(child(p, "axes"), "semi-axes must be positive");
    shape = Ellipse{axes.x(), axes.y()};
  } else if (kind == "circle") {
    const double r = number(require(j, p, "radius"), child(p, "radius"));
    if (!(r > 0.0)) schema_error(child(p, "radius"), "must be positive");
    shape = Circle{r};
  } else if (kind == "polygon") {
    const Json& vs = require(j, p, "vertices");
    const std::string vp = child(p, "vertices");
    if (!vs.is_array() || vs.size() < 3) schema_error(vp, "expected at least 3 vertices");
    ConvexPolygon poly;
    for (std::size_t i = 0; i < vs.size(); ++i) poly.vertices.push_back(vec2(vs[i], child(vp, i)));
    shape = std::move(poly);
  } else {
    schema_error(child(p, "type"), "expected \"ellipse\", \"circle\" or \"polygon\"");
  }
  const Vec2 center = vec2(require(j, p, "center"), child(p, "center"));
  std::optional<Vec2> reference;
  if (const Json* r = optional_field(j, p, "reference_point")) reference = vec2(*r, child(p, "reference_point"));
  const double orientation = number_or(j, p, "orientation", 0.0);
  const double margin = number_or(j, p, "margin", 0.0);
  if (margin < 0.0) schema_error(child(p, "margin"), "must be non-negative");
  const Vec2 velocity = vec2_or(j, p, "velocity", Vec2::Zero());
  const double angular = number_or(j, p, "angular_velocity", 0.0);
  try {
    return StarObstacle(std::move(shape), center, orientation, reference, margin, velocity, angular);
  } catch (const Error& e) {
    schema_error(p, e.what());
  }
}

Json scenario_to_json(const Scenario& s) {
  Json j;
  j["name"] = s.name;
  Json obstacles = Json::array();
  for (const WorldObstacle& w : s.obstacles) {
    Json o = obstacle_to_json(w.obstacle);
    o["tracked"] = w.tracked;
    if (w.track_margin != 0.0) o["track_margin"] = w.track_margin;
    obstacles.push_back(std::move(o));
  }
  j["obstacles"] = std::move(obstacles);
  j["agent"] = agent_to_json(s.agent);
  j["start"] = Json::array({s.start.x, s.start.y, s.start.theta});
  if (s.nominal.attractor) j["attractor"] = to_json(*s.nominal.attractor);
  Json nominal = {{"gain", s.nominal.gain}, {"max_speed", s.nominal.max_speed}};
  if (!s.nominal.script.empty()) {
    Json script = Json::array();
    for (const ScriptSegment& seg : s.nominal.script) {
      script.push_back({{"t", seg.t}, {"v", to_json(seg.velocity)}});
    }
    nominal["script"] = std::move(script);
  }
  j["nominal"] = std::move(nominal);
  j["scan"] = {{"delta", s.scan.sampling_angle},
               {"fov", Json::array({s.scan.fov_min, s.scan.fov_max})},
               {"max_range", s.scan.max_range},
               {"noise", s.scan.noise},
               {"period", s.scan_period}};
  j["integrator"] = {{"dt", s.integrator.dt},
                     {"scheme", s.integrator.scheme == Integrator::kRK4 ? "rk4" : "euler"},
                     {"duration", s.integrator.duration},
                     {"adaptive", s.integrator.adaptive}};
  j["seed"] = s.seed;
  j["mode"] = mode_name(s.mode);
  j["tail_negligence"] = s.tail_negligence;
  j["tracker_period"] = s.tracker_period;
  j["min_obstacle_angle"] = s.min_obstacle_angle;
  j["actuation"] = {{"max_speed", s.max_speed}};
  return j;
}

Scenario scenario_from_json(const Json& j) {
  const std::string root;
  if (!j.is_object()) schema_error(root, "expected an object");
  Scenario s;
  if (const Json* name = optional_field(j, root, "name")) {
    if (!name->is_string()) schema_error("/name", "expected a string");
    s.name = name->get<std::string>();
  }
  if (const Json* obstacles = optional_field(j, root, "obstacles")) {
    if (!obstacles->is_array()) schema_error("/obstacles", "expected an array");
    for (std::size_t i = 0; i < obstacles->size(); ++i) {
      const std::string p = child("/obstacles", i);
      const Json& o = (*obstacles)[i];
      StarObstacle obstacle = obstacle_from_json(o, p);
      const double track_margin = number_or(o, p, "track_margin", 0.0);
      if (!(track_margin >= 0.0)) schema_error(p + "/track_margin", "expected a non-negative number");
      s.obstacles.push_back({std::move(obstacle), bool_or(o, p, "tracked", false), track_margin});
    }
  }
  if (const Json* wall = optional_field(j, root, "wall")) {
    const Vec2 lo = vec2(require(*wall, "/wall", "min"), "/wall/min");
    const Vec2 hi = vec2(require(*wall, "/wall", "max"), "/wall/max");
    const double thickness = number_or(*wall, "/wall", "thickness", 0.2);
    if (!(hi.x() > lo.x() && hi.y() > lo.y())) schema_error("/wall", "max must exceed min");
    if (!(thickness > 0.0)) schema_error("/wall/thickness", "must be positive");
    for (WorldObstacle& w : bounding_wall(lo.x(), lo.y(), hi.x(), hi.y(), thickness)) {
      s.obstacles.push_back(std::move(w));
    }
  }
  if (const Json* agent = optional_field(j, root, "agent")) s.agent = agent_from_json(*agent, "/agent");
  const auto start = numbers(require(j, root, "start"), "/start", 3);
  s.start = Pose{start[0], start[1], start[2]};
  if (const Json* a = optional_field(j, root, "attractor")) s.nominal.attractor = vec2(*a, "/attractor");
  if (const Json* nominal = optional_field(j, root, "nominal")) {
    s.nominal.gain = number_or(*nominal, "/nominal", "gain", s.nominal.gain);
    s.nominal.max_speed = number_or(*nominal, "/nominal", "max_speed", s.nominal.max_speed);
    if (const Json* script = optional_field(*nominal, "/nominal", "script")) {
      if (!script->is_array()) schema_error("/nominal/script", "expected an array");
      for (std::size_t i = 0; i < script->size(); ++i) {
        const std::string p = child("/nominal/script", i);
        ScriptSegment seg;
        seg.t = number(require((*script)[i], p, "t"), child(p, "t"));
        seg.velocity = vec2(require((*script)[i], p, "v"), child(p, "v"));
        s.nominal.script.push_back(seg);
      }
    }
  }
  if (const Json* scan = optional_field(j, root, "scan")) s.scan = scan_from_json(*scan, "/scan", &s.scan_period);
  if (const Json* integ = optional_field(j, root, "integrator")) {
    s.integrator = integrator_from_json(*integ, "/integrator");
  }
  if (const Json* seed = optional_field(j, root, "seed")) {
    if (!seed->is_number_unsigned() && !(seed->is_number_integer() && seed->get<std::int64_t>() >= 0)) {
      schema_error("/seed", "expected a non-negative integer");
    }
    s.seed = seed->get<std::uint64_t>();
  }
  if (const Json* mode = optional_field(j, root, "mode")) {
    if (!mode->is_string()) schema_error("/mode", "expected a string");
    try {
      s.mode = parse_mode(mode->get<std::string>());
    } catch (const Error&) {
      schema_error("/mode", "expected \"analytic\", \"sampled\" or \"mixed\"");
    }
  }
  s.tail_negligence = bool_or(j, root, "tail_negligence", s.tail_negligence);
  s.tracker_period = number_or(j, root, "tracker_period", s.tracker_period);
  s.min_obstacle_angle = number_or(j, root, "min_obstacle_angle", s.min_obstacle_angle);
  if (const Json* act = optional_field(j, root, "actuation")) {
    s.max_speed = number_or(*act, "/actuation", "max_speed", s.max_speed);
    if (s.max_speed < 0.0) schema_error("/actuation/max_speed", "must be non-negative");
  }
  return s;
}

Scenario parse_scenario(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    schema_error("", std::string("malformed JSON: ") + e.what());
  }
  return scenario_from_json(j);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kSchema, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kSchema, "cannot write " + path.string());
  out << scenario_to_json(scenario).dump(2) << '\n';
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t scenario_hash(const Scenario& scenario) { return fnv1a(scenario_to_json(scenario).dump()); }

std::string provenance_line(const Provenance& p) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "# fastmod %s seed=%" PRIu64 " scenario=%016" PRIx64, FASTMOD_VERSION,
                p.seed, p.scenario_hash);
  return buf;
}

void write_trajectory_csv(std::ostream& out, std::span<const ControlTick> trajectory,
                          const Provenance& provenance) {
  out << provenance_line(provenance) << '\n';
  out << "t,x,y,theta,v_cmd_lin,v_cmd_ang,delta_c,d_min\n";
  const auto old_precision = out.precision(10);
  for (const ControlTick& k : trajectory) {
    out << k.time << ',' << k.pose.x << ',' << k.pose.y << ',' << k.pose.theta << ','
        << k.command.linear << ',' << k.command.angular << ',' << k.control_contribution << ','
        << k.min_distance << '\n';
  }
  out.precision(old_precision);
}

ScanPointSet ScanLog::points() const {
  ScanPointSet scan;
  scan.timestamp = meta.time;
  scan.sampling_angle = meta.delta;
  const Vec2 origin = meta.pose.position();
  for (const ScanBeam& b : beams) {
    if (!(b.range < meta.max_range) || b.range < 0.0) continue;
    const double a = meta.pose.theta + b.angle;
    scan.points.push_back(origin + b.range * Vec2(std::cos(a), std::sin(a)));
  }
  return scan;
}

ScanLog read_scan_log(const std::filesystem::path& csv_path) {
  std::filesystem::path sidecar = csv_path;
  sidecar.replace_extension(".json");
  std::ifstream meta_in(sidecar);
  if (!meta_in) throw Error(ErrorKind::kSchema, "missing metadata sidecar " + sidecar.string());
  Json j;
  try {
    j = Json::parse(meta_in);
  } catch (const Json::parse_error& e) {
    schema_error("", std::string("malformed sidecar: ") + e.what());
  }
  ScanLog log;
  log.meta.delta = number(require(j, "", "delta"), "/delta");
  const Vec2 fov = vec2(require(j, "", "fov"), "/fov");
  log.meta.fov_min = fov.x();
  log.meta.fov_max = fov.y();
  log.meta.max_range = number(require(j, "", "max_range"), "/max_range");
  const auto pose = numbers(require(j, "", "pose"), "/pose", 3);
  log.meta.pose = Pose{pose[0], pose[1], pose[2]};
  log.meta.time = number_or(j, "", "t", 0.0);
  if (!(log.meta.delta > 0.0)) schema_error("/delta", "must be positive");

  std::ifstream in(csv_path);
  if (!in) throw Error(ErrorKind::kSchema, "cannot open " + csv_path.string());
  std::string line;
  std::size_t row = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line != "angle_rad,range_m") {
        throw Error(ErrorKind::kSchema, csv_path.string() + ":" + std::to_string(row) +
                                            ": expected header angle_rad,range_m");
      }
      header = true;
      continue;
    }
    ScanBeam beam;
    char comma = 0;
    std::istringstream fields(line);
    if (!(fields >> beam.angle >> comma >> beam.range) || comma != ',') {
      throw Error(ErrorKind::kSchema, csv_path.string() + ":" + std::to_string(row) + ": malformed row");
    }
    log.beams.push_back(beam);
  }
  if (!header) throw Error(ErrorKind::kSchema, csv_path.string() + ": empty scan file");
  return log;
}

void write_scan_log(const ScanLog& log, const std::filesystem::path& csv_path) {
  std::ofstream out(csv_path);
  if (!out) throw Error(ErrorKind::kSchema, "cannot write " + csv_path.string());
  out.precision(17);
  out << "angle_rad,range_m\n";
  for (const ScanBeam& b : log.beams) out << b.angle << ',' << b.range << '\n';
  std::filesystem::path sidecar = csv_path;
  sidecar.replace_extension(".json");
  std::ofstream meta(sidecar);
  if (!meta) throw Error(ErrorKind::kSchema, "cannot write " + sidecar.string());
  const Json j = {{"delta", log.meta.delta},
                  {"fov", Json::array({log.meta.fov_min, log.meta.fov_max})},
                  {"max_range", log.meta.max_range},
                  {"pose", Json::array({log.meta.pose.x, log.meta.pose.y, log.meta.pose.theta})},
                  {"t", log.meta.time}};
  meta << j.dump(2) << '\n';
}

ScanLog record_scan(std::span<const WorldObstacle> world, const Pose& sensor_pose,
                    const ScanSpec& spec, double time) {
  ScanLog log;
  log.meta.delta = spec.sampling_angle;
  log.meta.fov_min = spec.fov_min;
  log.meta.fov_max = spec.fov_max;
  log.meta.max_range = spec.max_range;
  log.meta.pose = sensor_pose;
  log.meta.time = time;
  const std::size_t beams = spec.beam_count();
  log.beams.reserve(beams);
  for (std::size_t i = 0; i < beams; ++i) {
    const double angle = spec.fov_min + static_cast<double>(i) * spec.sampling_angle;
    const double a = sensor_pose.theta + angle;
    const auto range = ray_cast(world, sensor_pose.position(), Vec2(std::cos(a), std::sin(a)), spec.max_range);
    log.beams.push_back({angle, range ? std::min(*range, spec.max_range) : spec.max_range});
  }
  return log;
}

std::vector<ScanLog> read_scan_sequence(const std::filesystem::path& directory) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(directory)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<ScanLog> logs;
  for (const auto& f : files) logs.push_back(read_scan_log(f));
  std::stable_sort(logs.begin(), logs.end(),
                   [](const ScanLog& a, const ScanLog& b) { return a.meta.time < b.meta.time; });
  if (logs.empty()) throw Error(ErrorKind::kSchema, "no scan files in " + directory.string());
  return logs;
}

}  // namespace fastmod
