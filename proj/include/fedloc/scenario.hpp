#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fedloc/client.hpp"
#include "fedloc/federation.hpp"

namespace fedloc {

struct Waypoint {
  Vec2 position = Vec2::Zero();
  double heading = 0.0;  // rad, yaw held until the next waypoint
};

struct DevicePath {
  std::vector<Waypoint> waypoints;
  double speed = 1.0;   // m/s
  double height = 1.5;  // m, camera height above the ground plane

  double length() const;
  /// Ground-truth camera pose in the world frame after `t` seconds of
  /// constant-speed travel; the device stops at the last waypoint.
  Pose pose_at(double t) const;
};

struct WorldExtents {
  Vec2 min = Vec2(-50.0, -50.0);
  Vec2 max = Vec2(50.0, 50.0);
};

struct ScenarioConfig {
  std::string name;
  std::uint64_t seed = 0;
  WorldExtents world;
  std::vector<ServiceDescriptor> services;
  DevicePath device_path;
  VioModel vio;
  ClientConfig client;
  double duration = 10.0;  // s

  /// Throws Error naming the first invalid field.
  void validate() const;
};

/// Parses the textual config; keys mirror the struct field names.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const ScenarioConfig& cfg);

struct CycleRow {
  int cycle = 0;
  double t = 0.0;
  std::string selected_service;
  bool provisional = false;
  bool fix = false;
  std::optional<double> ate_selected;
  std::optional<double> confidence;
  int stitch_updates = 0;
  double pos_err_m = 0.0;
  double rot_err_rad = 0.0;
};

/// Values that are not a function of the config (wall-clock timing) or are
/// too bulky for the summary; never written to disk.
struct RunTrace {
  std::vector<Pose> app_poses;           // anchor frame
  std::vector<Pose> ground_truth;        // anchor frame
  std::vector<std::optional<FrameId>> frames;
  std::vector<double> compute_ms;
  std::vector<int> requests_per_cycle;
  std::vector<bool> discovery;
  std::map<std::string, std::int64_t> service_requests;
  std::map<std::string, std::int64_t> service_pose_estimations;
  std::int64_t registry_queries = 0;
  std::int64_t requests_sent = 0;
  std::vector<std::string> blacklisted;
  std::map<std::string, int> blacklisted_at;  // cycle index
};

struct MetricsReport {
  std::vector<CycleRow> rows;
  nlohmann::json summary;
  RunTrace trace;

  std::string cycles_csv() const;
  std::string summary_json() const { return summary.dump(2) + "\n"; }
};

MetricsReport run_scenario(const ScenarioConfig& cfg);

/// Position jump beyond the true motion between consecutive fixed cycles
/// whose service frame differs, one entry per switch.
std::vector<double> switch_discontinuities(const MetricsReport& report);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::string csv() const;
  /// Column index by name; throws Error if absent.
  std::size_t col(const std::string& name) const;
};

struct ExperimentResult {
  std::string name;
  Table table;
  nlohmann::json summary;
  std::vector<Table> extra_tables;
  std::vector<std::string> extra_names;
};

/// Stitching error against the true frame transform, by number of
/// observations in the second service (0 means no stitching: identity).
/// Uses services[0] as the previous frame (stitch_history observations, the
/// stitch_k most confident used) and services[1] as the new one.
ExperimentResult experiment_stitch_convergence(const ScenarioConfig& cfg, int n_trials, int max_obs);

/// Rank of the correct service (services[0]) and ATE spread of correct and
/// incorrect services per localization cycle.
ExperimentResult experiment_selector(const ScenarioConfig& cfg, int n_trials);

/// Place-recognizer gating outcomes per service, in and out of coverage,
/// at the configured threshold and over a threshold sweep.
ExperimentResult experiment_recognizer(const ScenarioConfig& cfg, int n_queries);

/// Writes cycles.csv and summary.json.
void write_run(const MetricsReport& report, const std::filesystem::path& out_dir);
/// Writes <name>.csv, any extra tables, and summary.json.
void write_experiment(const ExperimentResult& result, const std::filesystem::path& out_dir);

/// Linear-interpolated percentile, q in [0, 100]. Throws on empty input.
double percentile(std::vector<double> values, double q);

}  // namespace fedloc
