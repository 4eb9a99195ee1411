#pragma once

// Iterative user-equilibrium assignment: simulate, update per-vehicle route
// choice probabilities with Gawron's pairwise rule, add a best-response
// alternative, resample, repeat until travel times settle.

#include <filesystem>
#include <string>
#include <vector>

#include "tcal/demandgen.hpp"
#include "tcal/microsim.hpp"
#include "tcal/netmodel.hpp"

namespace tcal::eq {

struct Alternative {
  std::vector<EdgeIdx> route;
  double cost = 0.0;  // s
  double probability = 0.0;
  bool operator==(const Alternative&) const = default;
};

struct RouteSet {
  std::string trip_id;
  std::vector<Alternative> alternatives;
  std::size_t chosen_index = 0;
  bool operator==(const RouteSet&) const = default;
};

struct IterationMetrics {
  int iteration = 0;
  double avg_speed = 0.0;        // m/s, mean over arrived vehicles
  double time_loss = 0.0;        // s, mean per arrived vehicle
  double avg_travel_time = 0.0;  // s, mean per arrived vehicle
  bool operator==(const IterationMetrics&) const = default;
};

/// Smooths the chosen route's cost toward `experienced_cost`, then shifts
/// probability between the chosen route and every other alternative toward
/// the cheaper one. Probabilities stay on the simplex.
RouteSet gawron_update(RouteSet rs, double experienced_cost, double beta = 0.9, double alpha = 0.5);

/// True iff the last `window` avg_travel_time values differ by less than
/// `tol` relative to their minimum. False with fewer than `window` entries.
bool convergence_check(const std::vector<IterationMetrics>& metrics, double tol, int window);

struct DuaConfig {
  int max_iter = 50;
  double tol = 0.01;
  int window = 5;
  double beta = 0.9;
  double alpha = 0.5;
  std::size_t max_alternatives = 5;
  /// Weight of the newest simulation in the smoothed edge costs.
  double cost_smoothing = 0.5;
  std::uint64_t seed = 0;
  /// Simulation settings per iteration; rerouting is switched off so that
  /// every vehicle drives the route it was assigned.
  sim::SimConfig sim;
  bool operator==(const DuaConfig&) const = default;
};

void check_config(const DuaConfig& c);

struct DuaResult {
  std::vector<demand::VehicleRoute> routes;  // last simulated assignment
  std::vector<RouteSet> route_sets;
  std::vector<IterationMetrics> metrics;
  bool converged = false;
};

/// Throws demand::NoPathError when a trip has no route at all.
DuaResult dua_iterate(const net::RoadNetwork& net, const demand::TripTable& trips, const DuaConfig& config);

/// Metrics of one simulation run.
IterationMetrics metrics_of(const sim::SimOutput& out, int iteration);

std::string metrics_to_csv(const std::vector<IterationMetrics>& metrics);
void write_metrics(const std::vector<IterationMetrics>& metrics, const std::filesystem::path& path);

}  // namespace tcal::eq
