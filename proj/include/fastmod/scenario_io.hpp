#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fastmod/simulator.hpp"

namespace fastmod {

using Json = nlohmann::json;

/// Obstacle <-> JSON. Schema errors carry the JSON pointer of the offending field.
Json obstacle_to_json(const StarObstacle& obstacle);
StarObstacle obstacle_from_json(const Json& j, const std::string& pointer = "");

Json scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const Json& j);

/// Parse text; syntax errors are reported as schema errors at "".
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

std::string_view mode_name(AvoidanceMode mode);
AvoidanceMode parse_mode(std::string_view name);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
/// Hash of the canonical (compact) scenario JSON.
std::uint64_t scenario_hash(const Scenario& scenario);

struct Provenance {
  std::uint64_t seed = 0;
  std::uint64_t scenario_hash = 0;
};

/// "# fastmod <version> seed=<n> scenario=<16 hex digits>"
std::string provenance_line(const Provenance& provenance);

/// CSV t,x,y,theta,v_cmd_lin,v_cmd_ang,delta_c,d_min preceded by the provenance line.
void write_trajectory_csv(std::ostream& out, std::span<const ControlTick> trajectory,
                          const Provenance& provenance);

/// Metadata of a recorded scan (sidecar JSON next to the CSV).
struct ScanMeta {
  double delta = 7e-3;
  double fov_min = -kPi;
  double fov_max = kPi;
  double max_range = 10.0;
  Pose pose;
  double time = 0.0;
};

struct ScanBeam {
  double angle = 0.0;  // rad, relative to the sensor heading
  double range = 0.0;  // m
};

struct ScanLog {
  ScanMeta meta;
  std::vector<ScanBeam> beams;

  /// World-frame points of the beams that hit something (range < max_range).
  ScanPointSet points() const;
};

/// Reads `<stem>.csv` (header angle_rad,range_m) and its sidecar `<stem>.json`.
ScanLog read_scan_log(const std::filesystem::path& csv_path);
void write_scan_log(const ScanLog& log, const std::filesystem::path& csv_path);

/// One beam per increment from the sensor pose, max_range where nothing is hit.
ScanLog record_scan(std::span<const WorldObstacle> world, const Pose& sensor_pose,
                    const ScanSpec& spec, double time);

/// Every *.csv in a directory, sorted by sidecar time then file name.
std::vector<ScanLog> read_scan_sequence(const std::filesystem::path& directory);

}  // namespace fastmod
