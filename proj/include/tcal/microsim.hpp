#pragma once

// Discrete-time microscopic simulation: Krauss car-following on edge lanes,
// signal control, rerouting devices, teleports, buses and detector counting.

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tcal/core.hpp"
#include "tcal/demandgen.hpp"
#include "tcal/netmodel.hpp"
#include "tcal/series.hpp"

namespace tcal::sim {

struct CarFollowParams {
  double accel = 2.6;
  double decel = 4.5;
  /// Vehicle top speed; the edge speed limit caps it further.
  double v_max = 55.56;
  double tau = 1.0;
  double sigma = 0.5;
  double min_gap = 2.5;
  double veh_length = 5.0;
  bool operator==(const CarFollowParams&) const = default;
};

CarFollowParams default_car() noexcept;
CarFollowParams default_bus() noexcept;
/// Throws ConfigError naming the first violated invariant.
void check_params(const CarFollowParams& p, std::string_view what);

/// Safe speed for the next step. A negative gap is treated as zero.
double krauss_speed(double v, double v_leader, double gap, const CarFollowParams& p, double step,
                    double rand01);

struct SimConfig {
  double begin = 0.0;
  double end = kDaySeconds;
  double step_length = 1.0;
  double ignore_junction_blocker = 15.0;
  double time_to_teleport = 300.0;
  double rerouting_probability = 0.0;
  double rerouting_period = 300.0;
  std::uint64_t seed = 0;
  CarFollowParams car = default_car();
  CarFollowParams bus = default_bus();
  /// Actuated signals: a green is extended while a vehicle was within
  /// actuation_zone meters of the stop line during the last max_gap seconds.
  double actuation_max_gap = 3.0;
  double actuation_zone = 50.0;
  /// Weight of the newest period in the smoothed edge speeds.
  double speed_smoothing = 0.5;
  /// Bin width of the time-dependent edge travel times in SimOutput.
  double edge_cost_interval = 60.0;
  bool operator==(const SimConfig&) const = default;
};

void check_config(const SimConfig& c);

struct Detector {
  std::string id;
  std::string edge_id;
  int lane = -1;  // -1 counts every lane of the edge
  double position = 0.0;
  double window = kWindowSeconds;
  bool operator==(const Detector&) const = default;
};

struct BusLine {
  std::string id;
  std::vector<std::string> stop_sequence;  // bus stop ids
  std::vector<std::string> route;          // edge ids
  std::vector<double> departures;
  double dwell = 10.0;
  bool operator==(const BusLine&) const = default;
};

enum class VehicleKind { car, bus };
std::string_view to_string(VehicleKind k) noexcept;

struct VehicleState {
  std::string id;
  std::vector<EdgeIdx> route;
  std::size_t route_index = 0;
  int lane = -1;
  double position = 0.0;
  double speed = 0.0;
  double depart = 0.0;  // scheduled
  bool equipped = false;
  std::optional<double> waiting_since;
  VehicleKind kind = VehicleKind::car;

  enum class Status { pending, running, arrived };
  Status status = Status::pending;
  double inserted_at = 0.0;
  double arrived_at = 0.0;
  double free_time = 0.0;  // Σ length/limit over edges entered
  double driven_length = 0.0;  // Σ length over edges entered
  int teleport_count = 0;
  double v_cap = 0.0;  // speed bound used for the last update
};

struct VehicleResult {
  std::string id;
  VehicleKind kind = VehicleKind::car;
  bool arrived = false;
  double depart = 0.0;
  double travel_time = 0.0;  // up to arrival, or up to the end of the run
  double time_loss = 0.0;
  double route_length = 0.0;  // m over edges entered
  int teleport_count = 0;
  bool operator==(const VehicleResult&) const = default;
};

struct Totals {
  long long departed = 0;
  long long arrived = 0;
  long long still_running = 0;
  long long not_inserted = 0;
  long long teleports = 0;
  bool operator==(const Totals&) const = default;
};

struct SimOutput {
  std::map<std::string, DetectorSeries> detector_series;
  std::vector<long long> running_count;  // sampled at the start of each minute
  std::vector<VehicleResult> vehicles;   // in insertion-schedule order
  Totals totals;
  /// Mean traversal time per edge; free-flow time where no vehicle finished it.
  std::vector<double> edge_travel_times;
  /// Mean traversal time by entry-time bin, edge-major: [e * bins + b]. Bins
  /// nobody entered hold the edge's overall mean.
  std::vector<double> edge_time_bins;
  double edge_cost_interval = 60.0;
  std::size_t bins_per_edge() const noexcept { return edge_time_bins.size() / std::max<std::size_t>(edge_travel_times.size(), 1); }
  /// Time-dependent cost of entering edge e at time t.
  double edge_cost_at(EdgeIdx e, double t) const;
  std::map<std::string, int> parking_occupancy;
  bool operator==(const SimOutput&) const = default;
};

// --- signal control ---------------------------------------------------------

/// Phase (0-based) of a static program at time `now`, counting cycles from 0.
std::size_t static_phase_at(const net::TlsProgram& program, double now);

class TlsController {
 public:
  explicit TlsController(const net::TlsProgram& program, double max_gap = 3.0, double start = 0.0);
  /// Advance to `now` given which approaches currently see a vehicle.
  std::size_t update(double now, std::span<const bool> occupied);
  std::size_t phase() const noexcept { return phase_; }
  double phase_started() const noexcept { return started_; }
  const net::TlsProgram& program() const noexcept { return *program_; }
  /// Signal character for approach k in the current phase ('G' if unset).
  char signal(std::size_t approach) const noexcept;

 private:
  bool extendable(std::size_t phase) const;

  const net::TlsProgram* program_;
  double max_gap_;
  std::size_t phase_ = 0;
  double started_ = 0.0;
  std::vector<double> last_seen_;
};

std::size_t tls_step(TlsController& controller, std::span<const bool> occupied, double now);

// --- simulation -------------------------------------------------------------

class Simulation {
 public:
  /// Throws ConfigError or DanglingReference before any vehicle moves.
  Simulation(const net::RoadNetwork& net, std::vector<demand::VehicleRoute> routes,
             std::vector<BusLine> bus_lines, std::vector<Detector> detectors, SimConfig config);

  void step();
  bool finished() const noexcept;
  double time() const noexcept { return time_; }
  std::uint64_t step_index() const noexcept { return step_; }
  SimOutput run_to_end();
  SimOutput output() const;

  const std::vector<VehicleState>& vehicles() const noexcept { return vehicles_; }
  const CarFollowParams& params(const VehicleState& v) const noexcept;
  /// Vehicle indices on a lane, front first.
  const std::deque<std::uint32_t>& lane_occupants(EdgeIdx e, int lane) const;
  Totals totals() const;
  const std::vector<TlsController>& signals() const noexcept { return tls_; }
  /// Smallest bumper-to-bumper distance on any lane; +inf when no lane has
  /// two vehicles. Negative means a collision.
  double min_gap() const;

 private:
  struct Lane {
    EdgeIdx edge = 0;
    std::deque<std::uint32_t> queue;
    // Vehicle that left through the lane end and may still overhang it.
    std::uint32_t exit_vehicle = UINT32_MAX;
    std::size_t exit_route_index = 0;
  };
  struct Plan {
    bool may_cross = false;
    std::size_t target_lane = 0;
    bool held = false;  // front vehicle stopped by a full target lane
  };
  struct BusStopPlan {
    std::size_t route_index;
    double position;
  };
  struct DetectorRt {
    Detector def;
    EdgeIdx edge;
    std::vector<double> counts;
  };

  std::size_t lane_id(EdgeIdx e, int lane) const { return lane_offset_[e] + static_cast<std::size_t>(lane); }
  double lane_length(std::size_t lane) const;
  double free_entry(std::size_t lane) const;
  std::size_t best_lane(EdgeIdx e) const;
  struct Ghost {
    double back;
    double speed;
  };
  std::optional<Ghost> overhang(std::size_t lane) const;
  char signal_for(EdgeIdx e) const;
  void update_signals(double now);
  void compute_speeds(double now);
  void advance(double now, double next);
  void count_detectors(EdgeIdx e, int lane, std::uint32_t veh, double from, double to, double now, double next);
  void leave_edge(std::uint32_t veh, double when);
  void enter_edge(std::uint32_t veh, std::size_t route_index, std::size_t lane, double pos, double when);
  void arrive(std::uint32_t veh, double when, bool completed_edge = true);
  void teleports(double now);
  void insert_departures(double now);
  void reroute(double now);
  void sample_running(double now);

  const net::RoadNetwork* net_;
  SimConfig cfg_;
  std::uint64_t sim_key_;
  std::vector<VehicleState> vehicles_;
  std::vector<Plan> plan_;
  std::vector<double> next_speed_;
  std::vector<double> entered_at_;
  std::vector<double> blocked_since_;
  std::vector<std::uint64_t> moved_;
  std::vector<std::vector<BusStopPlan>> bus_stops_;
  std::vector<std::size_t> next_stop_;
  std::vector<double> dwell_until_;
  std::vector<double> bus_dwell_;
  std::vector<double> next_reroute_;
  std::vector<std::uint32_t> schedule_;
  std::size_t schedule_pos_ = 0;
  std::deque<std::uint32_t> waiting_insert_;
  std::vector<std::uint32_t> active_;  // running, in insertion order

  std::vector<std::size_t> lane_offset_;
  std::vector<Lane> lanes_;
  std::vector<TlsController> tls_;
  std::vector<JunctionIdx> tls_junction_;
  std::unique_ptr<bool[]> occupied_;
  std::vector<int> edge_tls_;  // controller index per edge end, -1 if none
  std::vector<std::vector<std::size_t>> edge_detectors_;
  std::vector<DetectorRt> detectors_;
  std::vector<int> edge_parking_;
  std::vector<int> parking_occupancy_;

  // Rerouting estimates.
  std::vector<double> speed_sum_;
  std::vector<std::uint32_t> speed_samples_;
  std::vector<double> est_speed_;
  std::vector<double> est_cost_;
  double next_estimate_ = 0.0;
  std::optional<net::Router> router_;

  std::vector<double> traverse_sum_;
  std::vector<std::uint32_t> traverse_count_;
  std::size_t bins_ = 1;
  std::vector<double> bin_sum_;
  std::vector<std::uint32_t> bin_count_;

  std::vector<long long> running_;
  std::size_t next_minute_ = 0;
  long long departed_ = 0;
  long long arrived_ = 0;
  long long teleports_ = 0;

  std::uint64_t step_ = 0;
  double time_ = 0.0;

  // Scratch for the batched speed update.
  std::vector<std::uint32_t> batch_ids_[2];
  std::vector<double> b_speed_[2], b_leader_[2], b_gap_[2], b_vmax_[2], b_rand_[2], b_out_[2];
};

SimOutput run(const net::RoadNetwork& net, std::vector<demand::VehicleRoute> routes,
              std::vector<BusLine> bus_lines, std::vector<Detector> detectors, const SimConfig& config);

// --- files ------------------------------------------------------------------

std::string routes_to_json(const net::RoadNetwork& net, const std::vector<demand::VehicleRoute>& routes);
std::vector<demand::VehicleRoute> parse_routes(std::string_view json_text, const net::RoadNetwork& net,
                                               std::string_view source = "<memory>");
void write_routes(const net::RoadNetwork& net, const std::vector<demand::VehicleRoute>& routes,
                  const std::filesystem::path& path);
std::vector<demand::VehicleRoute> read_routes(const std::filesystem::path& path, const net::RoadNetwork& net);

std::string detectors_to_json(const std::vector<Detector>& detectors);
std::vector<Detector> parse_detectors(std::string_view json_text, std::string_view source = "<memory>");
std::vector<Detector> read_detectors(const std::filesystem::path& path);
void write_detectors(const std::vector<Detector>& detectors, const std::filesystem::path& path);

std::string bus_lines_to_json(const std::vector<BusLine>& lines);
std::vector<BusLine> parse_bus_lines(std::string_view json_text, std::string_view source = "<memory>");
std::vector<BusLine> read_bus_lines(const std::filesystem::path& path);

/// Detector series in id order, one CSV for the whole run.
std::vector<DetectorSeries> series_of(const SimOutput& out);
std::string running_to_csv(const SimOutput& out);
/// `id,kind,arrived,depart,travel_time,time_loss,teleports`
std::string vehicles_to_csv(const SimOutput& out);
/// Writes detectors.csv, running.csv and vehicles.csv into `dir`.
void write_outputs(const SimOutput& out, const std::filesystem::path& dir);

}  // namespace tcal::sim
