#pragma once

// Calibration objective and the rerouting-probability grid sweep.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tcal/demandgen.hpp"
#include "tcal/microsim.hpp"
#include "tcal/series.hpp"

namespace tcal::calib {

class ZeroMeanError : public Error {
 public:
  ZeroMeanError() : Error("nrmse: mean of the real series is zero") {}
};

class LengthMismatchError : public Error {
 public:
  LengthMismatchError(std::size_t a, std::size_t b)
      : Error("nrmse: series lengths differ (" + std::to_string(a) + " vs " + std::to_string(b) + ")") {}
};

/// sqrt(Σ (real - sim)² / N) / mean(real)
double nrmse(std::span<const double> real, std::span<const double> sim);

/// Window-wise sum across detectors. Throws Error on empty input or a series
/// that does not have 96 windows.
DetectorSeries aggregate_series(const std::vector<DetectorSeries>& series);

struct Grid {
  double p_min = 0.0;
  double p_max = 1.0;
  double step = 0.01;
  bool operator==(const Grid&) const = default;
};

/// Grid points p_min + k·step (k = 0, 1, ...) up to p_max, rounded to 1e-9.
std::vector<double> grid_points(const Grid& grid);

struct SweepEntry {
  double p = 0.0;
  double nrmse = 0.0;
  bool operator==(const SweepEntry&) const = default;
};

struct SweepResult {
  std::vector<SweepEntry> entries;  // ascending p
  double best_p = 0.0;
  double best_nrmse = 0.0;
  bool operator==(const SweepResult&) const = default;
};

/// Picks the minimal nrmse; ties go to the smaller p.
SweepResult select_best(std::vector<SweepEntry> entries);

/// A simulation failure at one grid point.
class SweepError : public Error {
 public:
  SweepError(double p, const std::string& what)
      : Error("sweep at p=" + format_number(p) + ": " + what), p_(p) {}
  double p() const noexcept { return p_; }

 private:
  double p_;
};

struct SweepInputs {
  const net::RoadNetwork* net = nullptr;
  std::vector<demand::VehicleRoute> routes;
  std::vector<sim::BusLine> bus_lines;
  std::vector<sim::Detector> detectors;
  std::vector<DetectorSeries> real;
  sim::SimConfig sim;  // rerouting_probability is overridden per grid point
};

/// One simulation per grid point, all with sim.seed. Objective is
/// nrmse(aggregate(real), aggregate(simulated)) over the detectors of `real`.
SweepResult sweep_rerouting_probability(const SweepInputs& in, const Grid& grid, std::uint64_t seed,
                                        unsigned workers = 1);

/// Objective of one finished simulation against the real series.
double objective(const std::vector<DetectorSeries>& real, const sim::SimOutput& out);

/// `p,nrmse` rows then `best_p,best_nrmse` and its values.
std::string sweep_to_csv(const SweepResult& r);
void write_sweep(const SweepResult& r, const std::filesystem::path& path);
SweepResult parse_sweep_csv(std::string_view text, std::string_view source = "<memory>");

}  // namespace tcal::calib
