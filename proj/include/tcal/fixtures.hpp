#pragma once

// Synthetic scenarios used by tests, the acceptance suite and `fixture make`.

#include <cstdint>
#include <vector>

#include "tcal/dataio.hpp"
#include "tcal/demandgen.hpp"
#include "tcal/microsim.hpp"
#include "tcal/netmodel.hpp"

namespace tcal::fixtures {

struct GridOptions {
  int rows = 5;
  int cols = 5;
  double spacing = 200.0;
  double speed = 13.89;
  int lanes = 1;
  net::TlsLogic logic = net::TlsLogic::actuated;
  /// Adds four dead-end gate junctions with an inbound and an outbound edge
  /// each, attached to the middle of every side.
  bool gates = true;
};

/// Junctions J{r}_{c}, edges "{from}-{to}" in both directions between
/// neighbours, signals at every interior junction, a few bus stops, parking
/// areas and building footprints.
net::RoadNetwork grid_network(const GridOptions& options = {});

/// Two parallel single-lane branches of equal length between a two-lane
/// entry edge "in" and a two-lane exit edge "out". `scale` multiplies every
/// length.
net::RoadNetwork two_route_network(double scale = 1.0);
/// `n` trips in -> out, evenly spread over `span` seconds.
demand::TripTable two_route_trips(int n = 200, double span = 450.0);

/// Trips between distinct random car edges with morning and evening peaks.
demand::TripTable random_trips(const net::RoadNetwork& net, int n, std::uint64_t seed);

/// Demographics for the grid: four quadrant districts, a school, a
/// university and the four gates. Sized to congest the grid at peak hours.
demand::DemandInputs grid_statistics(const net::RoadNetwork& grid, std::uint64_t seed);

/// Induction loops 30 m before the stop line on every approach of the
/// corner-interior and centre junctions, plus the gate entries (24 total).
std::vector<sim::Detector> grid_detectors(const net::RoadNetwork& grid);

/// One cross-town line along the middle row, every 15 minutes 06:00-20:00.
std::vector<sim::BusLine> grid_bus_lines(const net::RoadNetwork& grid);

/// Day-level records whose per-window mean over the days kept by `filter` is
/// exactly `truth`. Days the filter drops get distorted counts, and
/// `faulty_day` (if set) loses one window for the first detector.
std::vector<dataio::RawMeasurement> synthesize_measurements(const std::vector<DetectorSeries>& truth,
                                                            const std::vector<dataio::Date>& days,
                                                            const dataio::IngestionFilter& filter,
                                                            std::optional<dataio::Date> faulty_day,
                                                            double noise, std::uint64_t seed);

/// Every calendar day of the given month.
std::vector<dataio::Date> month_days(int year, unsigned month);

}  // namespace tcal::fixtures
