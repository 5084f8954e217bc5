#include <cstdio>
#include <exception>

#include <CLI11.hpp>

#include "commands.hpp"
#include "fastmod/errors.hpp"

namespace {

using fastmod::cli::Common;

void add_common(CLI::App* cmd, Common& c, bool scenario_flags = true) {
  cmd->add_option("--seed", c.seed, "RNG seed");
  cmd->add_option("--dt", c.dt, "control period [s]");
  if (scenario_flags) {
    cmd->add_option("--mode", c.mode, "obstacle description")
        ->check(CLI::IsMember({"analytic", "sampled", "mixed"}));
  }
  cmd->add_option("--tail", c.tail, "tail negligence")->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--out", c.out, "output directory")->capture_default_str();
  cmd->add_flag("--json", c.json, "machine-readable report on stdout");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fastmod: reactive obstacle avoidance by dynamical-system modulation"};
  app.set_version_flag("--version", FASTMOD_VERSION);
  app.require_subcommand(1);

  Common common;
  std::string scenario;

  CLI::App* run = app.add_subcommand("run", "roll out a scenario");
  run->add_option("scenario", scenario, "scenario JSON")->required();
  add_common(run, common);

  fastmod::cli::FieldArgs field_args;
  CLI::App* field = app.add_subcommand("field", "export the modulated vector field (CSV + SVG)");
  field->add_option("scenario", field_args.scenario, "scenario JSON")->required();
  field->add_option("--bounds", field_args.bounds, "x_min y_min x_max y_max")->expected(4);
  field->add_option("--resolution", field_args.resolution, "nodes along x and y")
      ->expected(2)
      ->capture_default_str();
  add_common(field, common);

  fastmod::cli::ReplayArgs replay_args;
  CLI::App* replay = app.add_subcommand("replay", "roll out against recorded scans");
  replay->add_option("scans", replay_args.scans, "scan CSV (with .json sidecar) or directory")->required();
  auto* attractor = replay->add_option("--attractor", replay_args.attractor, "x y")->expected(2);
  auto* velocity = replay->add_option("--velocity", replay_args.velocity, "constant nominal vx vy")->expected(2);
  attractor->excludes(velocity);
  replay->add_option("--start", replay_args.start, "x y theta (default: first sensor pose)")->expected(3);
  replay->add_option("--duration", replay_args.duration, "simulated seconds")->capture_default_str();
  replay->add_option("--radius", replay_args.radius, "agent radius [m]")->capture_default_str();
  add_common(replay, common, false);

  fastmod::cli::ExperimentArgs experiment_args;
  CLI::App* experiment = app.add_subcommand("experiment", "sampled vs disparate convergence comparison");
  experiment->add_option("--runs", experiment_args.runs)->capture_default_str();
  experiment->add_option("--threads", experiment_args.threads, "0 = all cores")->capture_default_str();
  experiment->add_option("--scan-delta", experiment_args.scan_delta, "scan increment [rad]");
  add_common(experiment, common, false);

  fastmod::cli::BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "timing of the modulation paths");
  bench->add_option("--sizes", bench_args.sizes, "points / obstacles per scene");
  bench->add_option("--repetitions", bench_args.repetitions);
  bench->add_option("--seed", common.seed, "RNG seed");
  bench->add_option("--out", common.out, "output directory")->capture_default_str();
  bench->add_flag("--json", common.json, "machine-readable report on stdout");

  fastmod::cli::ServeArgs serve_args;
  CLI::App* serve = app.add_subcommand("serve", "websocket shared-control bridge");
  serve->add_option("scenario", serve_args.scenario, "scenario JSON")->required();
  serve->add_option("--port", serve_args.port)->capture_default_str();
  serve->add_option("--bind", serve_args.bind)->capture_default_str();
  serve->add_option("--time-scale", serve_args.time_scale, "simulated seconds per second")->capture_default_str();
  serve->add_option("--frame-rate", serve_args.frame_rate, "state frames per simulated second")
      ->capture_default_str();
  add_common(serve, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fastmod::cli::kExitMalformed;
  }

  try {
    if (*run) return fastmod::cli::run(scenario, common);
    if (*field) return fastmod::cli::field(field_args, common);
    if (*replay) return fastmod::cli::replay(replay_args, common);
    if (*experiment) return fastmod::cli::experiment(experiment_args, common);
    if (*bench) return fastmod::cli::bench(bench_args, common);
    if (*serve) return fastmod::cli::serve(serve_args, common);
  } catch (const fastmod::Error& e) {
    std::fprintf(stderr, "fastmod: %s\n", e.what());
    const bool malformed =
        e.kind() == fastmod::ErrorKind::kSchema || e.kind() == fastmod::ErrorKind::kInvalidConfig;
    return malformed ? fastmod::cli::kExitMalformed : fastmod::cli::kExitFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fastmod: %s\n", e.what());
    return fastmod::cli::kExitFailure;
  }
  return fastmod::cli::kExitFailure;
}
