#pragma once

// Activity-based demand: turns district demographics, city gates, schools and
// working hours into a timed trip table, then expands trips to free-flow routes.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tcal/core.hpp"
#include "tcal/netmodel.hpp"

namespace tcal::demand {

inline constexpr std::size_t kAgeBrackets = 13;
/// Lower bounds (years) of the age brackets; the last bracket is open-ended
/// up to kAgeBracketBounds[13].
inline constexpr std::array<int, kAgeBrackets + 1> kAgeBracketBounds{0,  3,  6,  10, 15, 18, 20,
                                                                     25, 30, 40, 50, 60, 65, 100};

struct DistrictStats {
  std::string id;
  std::vector<std::string> edge_ids;  // where homes and work sites attach
  long long inhabitants = 0;
  long long households = 0;
  long long workers = 0;  // living in the district
  long long work_positions = 0;
  long long unemployed = 0;
  long long vehicles = 0;
  std::array<long long, kAgeBrackets> age_brackets{};
  bool operator==(const DistrictStats&) const = default;
};

struct CityGate {
  std::string id;
  std::string in_edge;   // where incoming traffic enters
  std::string out_edge;  // where outgoing traffic leaves
  double incoming_share = 0.0;
  double outgoing_share = 0.0;
  bool operator==(const CityGate&) const = default;
};

/// A school, or a university when age_min >= 18 (students drive themselves).
struct School {
  std::string id;
  std::string edge_id;
  int age_min = 0;
  int age_max = 0;
  long long capacity = 0;
  double opening_h = 0.0;  // seconds of day
  double closing_h = 0.0;
  bool operator==(const School&) const = default;
};

struct WorkHours {
  double opening_h = 0.0;  // seconds of day
  double closing_h = 0.0;
  double worker_share = 0.0;
  bool operator==(const WorkHours&) const = default;
};

/// Day, early and late shifts.
std::vector<WorkHours> default_work_hours();

struct DemandConfig {
  double car_rate = 0.9363;
  double car_preference_rate = 0.5890;
  long long incoming_total = 0;
  long long outgoing_total = 0;
  std::vector<WorkHours> work_hours = default_work_hours();
  double departure_jitter_sd = 900.0;
  /// Fraction of non-working adults making one midday round trip.
  double free_time_rate = 0.1;
  std::uint64_t seed = 0;
  bool operator==(const DemandConfig&) const = default;

  /// Probability that a person drives: car_rate * car_preference_rate.
  double drive_probability() const noexcept { return car_rate * car_preference_rate; }
};

/// Everything a statistics file holds.
struct DemandInputs {
  std::vector<DistrictStats> districts;
  std::vector<CityGate> gates;
  std::vector<School> schools;
  DemandConfig config;
  bool operator==(const DemandInputs&) const = default;
};

enum class Purpose { work, school_dropoff, university, incoming, outgoing, free_time };
std::string_view to_string(Purpose p) noexcept;

struct Trip {
  std::string id;
  double depart = 0.0;  // seconds of day, [0, 86400)
  std::string from_edge;
  std::string to_edge;
  Purpose purpose = Purpose::work;
  bool operator==(const Trip&) const = default;
};

struct TripTable {
  std::vector<Trip> trips;
  bool operator==(const TripTable&) const = default;
};

/// Thrown for an empty district list.
class EmptyDistrictsError : public Error {
 public:
  EmptyDistrictsError() : Error("demand generation needs at least one district") {}
};

/// Thrown when external traffic is requested but no city gate exists.
class NoGateError : public Error {
 public:
  NoGateError() : Error("external traffic requested but no city gates defined") {}
};

/// Deterministic for a fixed config.seed. Output is sorted by (depart, id).
TripTable generate_trips(const std::vector<DistrictStats>& stats, const std::vector<CityGate>& gates,
                         const std::vector<School>& schools, const DemandConfig& config,
                         const net::RoadNetwork& net);
TripTable generate_trips(const DemandInputs& inputs, const net::RoadNetwork& net);

/// A trip realized as a path; the unit of the route file.
struct VehicleRoute {
  std::string trip_id;
  std::vector<EdgeIdx> edges;
  double depart = 0.0;
  bool equipped = false;  // rerouting device forced on
  bool operator==(const VehicleRoute&) const = default;
};

struct ExpansionResult {
  std::vector<VehicleRoute> routes;   // successful trips, in trip order
  std::vector<std::string> no_path;   // trip ids without any route
};

/// Free-flow shortest path for every trip. Unroutable trips are listed in
/// no_path rather than dropped silently.
ExpansionResult expand_routes(const TripTable& trips, const net::RoadNetwork& net);

/// Raised by require_all_routed(); lists the trip ids.
class NoPathError : public Error {
 public:
  explicit NoPathError(std::vector<std::string> ids);
  const std::vector<std::string>& trip_ids() const noexcept { return ids_; }

 private:
  std::vector<std::string> ids_;
};
void require_all_routed(const ExpansionResult& result);

// --- files ------------------------------------------------------------------

std::string trips_to_json(const TripTable& trips);
TripTable parse_trips(std::string_view json_text, std::string_view source = "<memory>");
/// Writes trips sorted by (depart, id).
void write_trips(const TripTable& trips, const std::filesystem::path& path);
TripTable read_trips(const std::filesystem::path& path);

std::string statistics_to_json(const DemandInputs& inputs);
DemandInputs parse_statistics(std::string_view json_text, std::string_view source = "<memory>");
DemandInputs load_statistics(const std::filesystem::path& path);
void save_statistics(const DemandInputs& inputs, const std::filesystem::path& path);

}  // namespace tcal::demand
