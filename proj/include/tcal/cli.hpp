#pragma once

// Project configuration and the command-line front end.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "tcal/calibrate.hpp"
#include "tcal/dataio.hpp"
#include "tcal/demandgen.hpp"
#include "tcal/equilibrium.hpp"
#include "tcal/microsim.hpp"

namespace tcal::cli {

/// Relative paths in a config file are resolved against the file's directory.
struct Paths {
  std::filesystem::path network;
  std::filesystem::path statistics;
  std::filesystem::path trips;
  std::filesystem::path routes;
  std::filesystem::path detectors;
  std::filesystem::path bus_lines;
  std::filesystem::path measurements;
  std::filesystem::path output_dir = ".";
  bool operator==(const Paths&) const = default;
};

struct IngestSettings {
  dataio::IngestionFilter filter;
  std::string modeling_month = "2019-10";
  std::string validation_month = "2019-11";
  bool operator==(const IngestSettings&) const = default;
};

struct SweepSettings {
  calib::Grid grid;
  unsigned workers = 1;
  bool operator==(const SweepSettings&) const = default;
};

struct ProjectConfig {
  std::uint64_t seed = 0;
  Paths paths;
  sim::SimConfig sim;
  /// Numeric DemandConfig fields that replace the statistics file's values
  /// (car_rate, car_preference_rate, incoming_total, outgoing_total,
  /// departure_jitter_sd, free_time_rate).
  std::map<std::string, double> demand_overrides;
  eq::DuaConfig equilibrium;
  SweepSettings sweep;
  IngestSettings ingest;
  bool operator==(const ProjectConfig&) const = default;
};

ProjectConfig parse_project_config(std::string_view json_text, const std::filesystem::path& base_dir,
                                   std::string_view source = "<memory>");
ProjectConfig load_project_config(const std::filesystem::path& path);
/// Paths are written relative to `base_dir` when they lie below it.
std::string project_config_to_json(const ProjectConfig& config, const std::filesystem::path& base_dir);
void save_project_config(const ProjectConfig& config, const std::filesystem::path& path);

/// Applies demand_overrides and the project seed.
void apply_demand_overrides(const ProjectConfig& config, demand::DemandConfig& demand);

enum ExitCode : int { kOk = 0, kViolations = 1, kUsage = 2, kRuntime = 3 };

/// Full command line, argv[0] included. Output goes to `out`, diagnostics to
/// `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tcal::cli
