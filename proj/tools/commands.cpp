#include "commands.hpp"

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <pthread.h>

#include "fastmod/bench.hpp"
#include "fastmod/bridge_server.hpp"
#include "fastmod/scenario_io.hpp"
#include "svg.hpp"

namespace fastmod::cli {
namespace fs = std::filesystem;
namespace {

Json provenance_json(const Provenance& p) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(p.scenario_hash));
  return {{"tool", "fastmod"}, {"version", FASTMOD_VERSION}, {"seed", p.seed}, {"scenario_hash", hash}};
}

void apply(Scenario& s, const Common& c) {
  if (c.seed) s.seed = *c.seed;
  if (c.dt) {
    if (!(*c.dt > 0.0)) throw Error(ErrorKind::kSchema, "--dt: expected a positive number");
    s.integrator.dt = *c.dt;
  }
  if (c.mode) s.mode = parse_mode(*c.mode);
  if (c.tail) s.tail_negligence = *c.tail == "on";
}

Provenance provenance_of(const Scenario& s) { return {s.seed, scenario_hash(s)}; }

fs::path output_dir(const Common& c) {
  fs::path dir(c.out);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

int exit_code(Outcome o) {
  switch (o) {
    case Outcome::kConverged: return kExitConverged;
    case Outcome::kLocalMinimum: return kExitLocalMinimum;
    case Outcome::kCollision: return kExitCollision;
    case Outcome::kTimeout: return kExitTimeout;
  }
  return kExitFailure;
}

Json summary_json(const RolloutResult& r, const Provenance& p, const std::string& name) {
  Json j;
  j["provenance"] = provenance_json(p);
  j["scenario"] = name;
  j["outcome"] = outcome_name(r.outcome);
  j["time_to_converge"] = r.outcome == Outcome::kConverged ? Json(r.time_to_converge) : Json(nullptr);
  j["duration"] = r.duration;
  j["steps"] = r.steps;
  j["min_clearance"] = std::isfinite(r.min_clearance) ? Json(r.min_clearance) : Json(nullptr);
  j["contact_ticks"] = r.contact_ticks;
  j["final_pose"] = {r.final_pose.x, r.final_pose.y, r.final_pose.theta};
  return j;
}

void report(const RolloutResult& r, const Json& summary, const Common& c,
            const std::vector<fs::path>& files) {
  if (c.json) {
    Json j = summary;
    Json list = Json::array();
    for (const fs::path& f : files) list.push_back(f.string());
    j["files"] = std::move(list);
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::printf("outcome        %s\n", std::string(outcome_name(r.outcome)).c_str());
  if (r.outcome == Outcome::kConverged) std::printf("converged at   %.3f s\n", r.time_to_converge);
  std::printf("duration       %.3f s (%zu ticks)\n", r.duration, r.steps);
  std::printf("min clearance  %.4f m\n", r.min_clearance);
  std::printf("final pose     %.4f %.4f %.4f\n", r.final_pose.x, r.final_pose.y, r.final_pose.theta);
  for (const fs::path& f : files) std::printf("wrote          %s\n", f.string().c_str());
}

void require_nominal(const Scenario& s) {
  if (!s.nominal.attractor && s.nominal.script.empty()) {
    throw Error(ErrorKind::kSchema, "/nominal: scenario needs an attractor or a script");
  }
}

}  // namespace

int run(const std::string& path, const Common& common) {
  Scenario s = load_scenario(path);
  apply(s, common);
  require_nominal(s);
  const Provenance prov = provenance_of(s);
  const RolloutResult r = rollout(s);

  const fs::path dir = output_dir(common);
  const fs::path csv = dir / "trajectory.csv";
  const fs::path svg_path = dir / "trajectory.svg";
  const fs::path summary_path = dir / "summary.json";
  {
    std::ofstream f(csv);
    write_trajectory_csv(f, r.trajectory, prov);
  }
  write_text(svg_path, svg::trajectory_svg(s, r.trajectory, svg::fit_viewport(s), prov));
  const Json summary = summary_json(r, prov, s.name);
  write_text(summary_path, summary.dump(2) + "\n");
  report(r, summary, common, {csv, svg_path, summary_path});
  return exit_code(r.outcome);
}

int field(const FieldArgs& args, const Common& common) {
  Scenario s = load_scenario(args.scenario);
  apply(s, common);
  const Provenance prov = provenance_of(s);

  svg::Viewport view = svg::fit_viewport(s, 0.2);
  if (!args.bounds.empty()) {
    if (args.bounds.size() != 4 || !(args.bounds[2] > args.bounds[0]) || !(args.bounds[3] > args.bounds[1])) {
      throw Error(ErrorKind::kSchema, "--bounds: expected x_min y_min x_max y_max with max > min");
    }
    view.lower = Vec2(args.bounds[0], args.bounds[1]);
    view.upper = Vec2(args.bounds[2], args.bounds[3]);
  }
  if (args.resolution.size() != 2 || args.resolution[0] < 2 || args.resolution[1] < 2) {
    throw Error(ErrorKind::kSchema, "--resolution: expected two counts >= 2");
  }
  GridSpec grid;
  grid.lower = view.lower;
  grid.upper = view.upper;
  grid.nx = args.resolution[0];
  grid.ny = args.resolution[1];
  const FieldGrid f = evaluate_field(s, grid);

  const fs::path dir = output_dir(common);
  const fs::path csv = dir / "field.csv";
  const fs::path svg_path = dir / "field.svg";
  {
    std::ofstream out(csv);
    out << provenance_line(prov) << '\n';
    out << "x,y,v_n_x,v_n_y,xi_dot_x,xi_dot_y,inside\n";
    out.precision(10);
    for (const FieldNode& n : f.nodes) {
      out << n.position.x() << ',' << n.position.y() << ',' << n.nominal.x() << ',' << n.nominal.y() << ',';
      if (n.inside) {
        out << ",,1\n";
      } else {
        out << n.velocity.x() << ',' << n.velocity.y() << ",0\n";
      }
    }
  }
  write_text(svg_path, svg::field_svg(s, f, view, prov));

  std::size_t inside = 0;
  for (const FieldNode& n : f.nodes) inside += n.inside;
  if (common.json) {
    Json j{{"provenance", provenance_json(prov)},
           {"mode", mode_name(s.mode)},
           {"nodes", f.nodes.size()},
           {"inside", inside},
           {"files", {csv.string(), svg_path.string()}}};
    std::cout << j.dump(2) << '\n';
  } else {
    std::printf("mode    %s\nnodes   %zu (%zu inside obstacles)\nwrote   %s\nwrote   %s\n",
                std::string(mode_name(s.mode)).c_str(), f.nodes.size(), inside, csv.string().c_str(),
                svg_path.string().c_str());
  }
  return 0;
}

int replay(const ReplayArgs& args, const Common& common) {
  std::vector<ScanLog> logs;
  if (fs::is_directory(args.scans)) {
    logs = read_scan_sequence(args.scans);
    if (logs.empty()) throw Error(ErrorKind::kSchema, args.scans + ": no scan logs");
  } else {
    logs.push_back(read_scan_log(args.scans));
  }
  std::vector<ScanPointSet> scans;
  for (const ScanLog& log : logs) scans.push_back(log.points());

  Scenario s;
  s.name = fs::path(args.scans).filename().string();
  s.agent.radius = args.radius;
  if (!args.attractor.empty()) {
    if (args.attractor.size() != 2) throw Error(ErrorKind::kSchema, "--attractor: expected x y");
    s.nominal.attractor = Vec2(args.attractor[0], args.attractor[1]);
  }
  if (!args.velocity.empty()) {
    if (args.velocity.size() != 2) throw Error(ErrorKind::kSchema, "--velocity: expected vx vy");
    s.nominal.script.push_back({0.0, Vec2(args.velocity[0], args.velocity[1])});
  }
  require_nominal(s);
  if (!args.start.empty()) {
    if (args.start.size() != 3) throw Error(ErrorKind::kSchema, "--start: expected x y theta");
    s.start = Pose{args.start[0], args.start[1], args.start[2]};
  } else {
    s.start = logs.front().meta.pose;
  }
  if (!(args.duration > 0.0)) throw Error(ErrorKind::kSchema, "--duration: expected a positive number");
  s.integrator.duration = args.duration;
  apply(s, common);
  s.mode = AvoidanceMode::kSampled;

  // Hash covers the replay settings and the recorded data.
  Json keyed = scenario_to_json(s);
  Json data = Json::array();
  for (const ScanPointSet& scan : scans) {
    Json pts = Json::array();
    for (const Vec2& p : scan.points) pts.push_back({p.x(), p.y()});
    data.push_back({{"t", scan.timestamp}, {"points", std::move(pts)}});
  }
  keyed["scans"] = std::move(data);
  const Provenance prov{s.seed, fnv1a(keyed.dump())};

  const RolloutResult r = fastmod::replay(scans, s);
  const fs::path dir = output_dir(common);
  const fs::path csv = dir / "replay.csv";
  const fs::path summary_path = dir / "summary.json";
  {
    std::ofstream f(csv);
    write_trajectory_csv(f, r.trajectory, prov);
  }
  Json summary = summary_json(r, prov, s.name);
  summary["scans"] = scans.size();
  write_text(summary_path, summary.dump(2) + "\n");
  report(r, summary, common, {csv, summary_path});
  return exit_code(r.outcome);
}

int experiment(const ExperimentArgs& args, const Common& common) {
  ExperimentOptions options;
  options.threads = args.threads > 0 ? args.threads : std::max(1u, std::thread::hardware_concurrency());
  if (common.dt) options.integrator.dt = *common.dt;
  if (args.scan_delta > 0.0) options.scan.sampling_angle = args.scan_delta;
  if (common.tail) options.tail_negligence = *common.tail == "on";
  const std::uint64_t seed = common.seed.value_or(1);
  const ConvergenceTable t = convergence_experiment(args.runs, seed, options);

  const Json settings{{"runs", args.runs},
                      {"dt", options.integrator.dt},
                      {"duration", options.integrator.duration},
                      {"scan_delta", options.scan.sampling_angle},
                      {"tail_negligence", options.tail_negligence}};
  const Provenance prov{seed, fnv1a(settings.dump())};
  const fs::path dir = output_dir(common);
  const fs::path csv = dir / "experiment.csv";
  {
    std::ofstream f(csv);
    f << provenance_line(prov) << '\n';
    f << "run,sampled,disparate,sampled_time,disparate_time\n";
    for (const ExperimentRow& row : t.rows) {
      f << row.run << ',' << outcome_name(row.sampled) << ',' << outcome_name(row.disparate) << ',';
      if (row.sampled == Outcome::kConverged) f << row.sampled_time;
      f << ',';
      if (row.disparate == Outcome::kConverged) f << row.disparate_time;
      f << '\n';
    }
  }
  if (common.json) {
    Json j{{"provenance", provenance_json(prov)},
           {"settings", settings},
           {"sampled", {{"ratio", t.sampled_ratio}, {"mean_time", t.sampled_mean_time},
                        {"collisions", t.sampled_collisions}}},
           {"disparate", {{"ratio", t.disparate_ratio}, {"mean_time", t.disparate_mean_time},
                          {"collisions", t.disparate_collisions}}},
           {"joint_converged", t.joint_converged},
           {"files", {csv.string()}}};
    std::cout << j.dump(2) << '\n';
  } else {
    std::printf("%-22s %10s %10s\n", "", "Sampled", "Disparate");
    std::printf("%-22s %9.0f%% %9.0f%%\n", "Convergence ratio", 100.0 * t.sampled_ratio,
                100.0 * t.disparate_ratio);
    std::printf("%-22s %9.2fs %9.2fs\n", "Mean time (joint)", t.sampled_mean_time, t.disparate_mean_time);
    std::printf("%-22s %10zu %10zu\n", "Collisions", t.sampled_collisions, t.disparate_collisions);
    std::printf("runs %zu, jointly converged %zu, seed %llu\nwrote %s\n", t.rows.size(), t.joint_converged,
                static_cast<unsigned long long>(seed), csv.string().c_str());
  }
  return 0;
}

int bench(const BenchArgs& args, const Common& common) {
  BenchOptions options;
  if (!args.sizes.empty()) options.sizes = args.sizes;
  if (args.repetitions > 0) options.repetitions = args.repetitions;
  if (common.seed) options.seed = *common.seed;
  const BenchReport report = run_benchmarks(options);

  Json settings{{"sizes", options.sizes}, {"repetitions", options.repetitions}, {"warmup", options.warmup}};
  const Provenance prov{options.seed, fnv1a(settings.dump())};
  const fs::path dir = output_dir(common);
  const fs::path csv = dir / "bench.csv";
  {
    std::ofstream f(csv);
    f << provenance_line(prov) << '\n';
    write_bench_csv(f, report);
  }
  if (common.json) {
    Json j{{"provenance", provenance_json(prov)},
           {"series", Json::parse(bench_to_json(report))},
           {"files", {csv.string()}}};
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << format_bench_table(report) << "wrote " << csv.string() << '\n';
  }
  return 0;
}

int serve(const ServeArgs& args, const Common& common) {
  Scenario s = load_scenario(args.scenario);
  apply(s, common);
  BridgeOptions options;
  options.time_scale = args.time_scale;
  options.frame_rate = args.frame_rate;

  // Signals are taken synchronously by this thread; the server runs on its own.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  BridgeServer server(std::move(s), args.port, options, args.bind.c_str());
  std::fprintf(stderr, "serving ws://%s:%u\n", args.bind.c_str(), static_cast<unsigned>(server.port()));
  std::thread io([&] { server.run(); });
  int received = 0;
  sigwait(&signals, &received);
  server.stop();
  io.join();
  return 0;
}

}  // namespace fastmod::cli
