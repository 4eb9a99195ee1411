#pragma once

// Road network data model: junctions, directed edges, signal programs, bus
// stops, parking areas and building footprints, plus its JSON file format,
// structural validation and shortest-path routing.

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tcal/core.hpp"

namespace tcal::net {

enum class JunctionKind { plain, traffic_light, dead_end };
enum class RoadCategory { normal, tunnel, under_building, under_bridge };
/// `fixed` is written as "static" in files.
enum class TlsLogic { fixed, actuated };

std::string_view to_string(JunctionKind k) noexcept;
std::string_view to_string(RoadCategory c) noexcept;
std::string_view to_string(TlsLogic l) noexcept;

struct Junction {
  std::string id;
  double x = 0.0;  // planar meters
  double y = 0.0;
  JunctionKind kind = JunctionKind::plain;
  bool operator==(const Junction&) const = default;
};

struct Edge {
  std::string id;
  std::string from;
  std::string to;
  double length = 0.0;       // m
  int lane_count = 1;
  double speed_limit = 0.0;  // m/s
  RoadCategory category = RoadCategory::normal;
  bool bus_only = false;
  bool operator==(const Edge&) const = default;
};

/// One signal phase. `state` has one character per controlled connection,
/// each of 'G' (go), 'y' (yellow) or 'r' (stop).
struct TlsPhase {
  double duration = 0.0;
  double min_duration = 0.0;
  double max_duration = 0.0;
  std::string state;
  bool operator==(const TlsPhase&) const = default;
};

/// Signal program of one junction. The controlled connections of a junction
/// are its incoming edges in id order, so state[k] governs the k-th approach.
struct TlsProgram {
  std::string junction_id;
  TlsLogic logic = TlsLogic::fixed;
  std::vector<TlsPhase> phases;

  double cycle_time() const noexcept;
  bool operator==(const TlsProgram&) const = default;
};

struct BusStop {
  std::string id;
  std::string edge_id;
  double position = 0.0;  // m from edge start
  std::string name;
  bool operator==(const BusStop&) const = default;
};

struct ParkingArea {
  std::string id;
  std::string edge_id;
  int capacity = 0;
  int initial_occupancy = 0;
  bool operator==(const ParkingArea&) const = default;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

/// Stored and re-emitted only.
struct BuildingPoly {
  std::string id;
  std::vector<Point> vertices;
  bool operator==(const BuildingPoly&) const = default;
};

/// Raw, unlinked collections as they appear in a network file.
struct NetworkParts {
  std::vector<Junction> junctions;
  std::vector<Edge> edges;
  std::vector<TlsProgram> tls;
  std::vector<BusStop> bus_stops;
  std::vector<ParkingArea> parking;
  std::vector<BuildingPoly> buildings;
  bool operator==(const NetworkParts&) const = default;
};

/// Immutable, cross-linked road network. Every collection is sorted by id;
/// EdgeIdx / JunctionIdx index into edges() / junctions().
class RoadNetwork {
 public:
  RoadNetwork() = default;

  /// Sorts and links the parts. Throws DanglingReference for any reference to
  /// a missing junction or edge, and Error for duplicate ids. Value-level
  /// invariants (lengths, phase arity, ...) are left to validate_network().
  static RoadNetwork build(NetworkParts parts);

  const std::vector<Junction>& junctions() const noexcept { return parts_.junctions; }
  const std::vector<Edge>& edges() const noexcept { return parts_.edges; }
  const std::vector<TlsProgram>& tls_programs() const noexcept { return parts_.tls; }
  const std::vector<BusStop>& bus_stops() const noexcept { return parts_.bus_stops; }
  const std::vector<ParkingArea>& parking_areas() const noexcept { return parts_.parking; }
  const std::vector<BuildingPoly>& buildings() const noexcept { return parts_.buildings; }
  const NetworkParts& parts() const noexcept { return parts_; }

  std::size_t edge_count() const noexcept { return parts_.edges.size(); }
  const Edge& edge(EdgeIdx e) const { return parts_.edges[e]; }

  std::optional<EdgeIdx> find_edge(std::string_view id) const;
  /// Throws DanglingReference when absent.
  EdgeIdx edge_index(std::string_view id) const;
  std::optional<JunctionIdx> find_junction(std::string_view id) const;

  JunctionIdx from_junction(EdgeIdx e) const { return edge_from_[e]; }
  JunctionIdx to_junction(EdgeIdx e) const { return edge_to_[e]; }
  std::span<const EdgeIdx> outgoing(JunctionIdx j) const { return out_[j]; }
  std::span<const EdgeIdx> incoming(JunctionIdx j) const { return in_[j]; }
  /// Edges a vehicle may continue onto after `e`.
  std::span<const EdgeIdx> successors(EdgeIdx e) const { return out_[edge_to_[e]]; }

  /// Signal program controlling the end of `e`, or nullptr.
  const TlsProgram* tls_at_end(EdgeIdx e) const;
  /// Index of `e` among the incoming edges of its end junction.
  std::size_t approach_index(EdgeIdx e) const { return approach_[e]; }
  /// Index into tls_programs() of the program at junction j, or -1.
  int tls_index(JunctionIdx j) const { return junction_tls_[j]; }

 private:
  NetworkParts parts_;
  std::unordered_map<std::string, EdgeIdx> edge_by_id_;
  std::unordered_map<std::string, JunctionIdx> junction_by_id_;
  std::vector<JunctionIdx> edge_from_;
  std::vector<JunctionIdx> edge_to_;
  std::vector<std::vector<EdgeIdx>> out_;
  std::vector<std::vector<EdgeIdx>> in_;
  std::vector<std::size_t> approach_;
  std::vector<int> junction_tls_;
};

// --- file format -----------------------------------------------------------

/// Parse a network document. `source` names the input in error messages.
RoadNetwork parse_network(std::string_view json_text, std::string_view source = "<memory>");
RoadNetwork load_network(const std::filesystem::path& path);
std::string network_to_json(const RoadNetwork& net);
void save_network(const RoadNetwork& net, const std::filesystem::path& path);

// --- validation -------------------------------------------------------------

struct Violation {
  std::string code;
  std::string subject_id;
  std::string message;
  bool operator==(const Violation&) const = default;
};

/// Violation codes.
namespace code {
inline constexpr std::string_view kNonfiniteCoord = "NONFINITE_COORD";
inline constexpr std::string_view kNonpositiveLength = "NONPOSITIVE_LENGTH";
inline constexpr std::string_view kBadLaneCount = "BAD_LANE_COUNT";
inline constexpr std::string_view kNonpositiveSpeed = "NONPOSITIVE_SPEED";
inline constexpr std::string_view kMissingTls = "MISSING_TLS";
inline constexpr std::string_view kDuplicateTls = "DUPLICATE_TLS";
inline constexpr std::string_view kTlsNotSignalized = "TLS_NOT_SIGNALIZED";
inline constexpr std::string_view kEmptyProgram = "EMPTY_PROGRAM";
inline constexpr std::string_view kPhaseArity = "PHASE_ARITY";
inline constexpr std::string_view kPhaseState = "PHASE_STATE";
inline constexpr std::string_view kPhaseDuration = "PHASE_DURATION";
inline constexpr std::string_view kStopPosition = "STOP_POSITION";
inline constexpr std::string_view kParkingOccupancy = "PARKING_OCCUPANCY";
inline constexpr std::string_view kDegeneratePolygon = "DEGENERATE_POLYGON";
inline constexpr std::string_view kUnreachableEdge = "UNREACHABLE_EDGE";
}  // namespace code

/// All invariant violations, sorted by (code, subject_id). Empty iff valid.
std::vector<Violation> validate_network(const RoadNetwork& net);

// --- routing ----------------------------------------------------------------

/// Ordered edge list with its total cost (sum of every edge's weight,
/// including the first and the last).
struct Route {
  std::vector<EdgeIdx> edges;
  double cost = 0.0;
};

/// length / speed_limit
double free_flow_time(const Edge& e) noexcept;
/// Per-edge free-flow times; bus-only edges are infinite (closed to cars).
std::vector<double> car_free_flow_costs(const RoadNetwork& net);
/// Per-edge free-flow times for every edge.
std::vector<double> free_flow_costs(const RoadNetwork& net);

/// Dijkstra over edges with reusable scratch buffers. Not thread-safe; use one
/// Router per thread. Edges with infinite cost are impassable. Among equal-cost
/// routes the one whose edges were settled first by (cost, edge index) wins,
/// which prefers lexicographically smaller edge ids.
class Router {
 public:
  explicit Router(const RoadNetwork& net);
  std::optional<Route> route(EdgeIdx from, EdgeIdx to, std::span<const double> costs);
  const RoadNetwork& network() const noexcept { return *net_; }

 private:
  const RoadNetwork* net_;
  std::vector<double> dist_;
  std::vector<EdgeIdx> pred_;
  std::vector<EdgeIdx> touched_;
};

using EdgeWeight = std::function<double(const Edge&)>;

/// One-shot query. A null weight means free-flow time.
std::optional<Route> shortest_path(const RoadNetwork& net, EdgeIdx from, EdgeIdx to,
                                   const EdgeWeight& weight = {});

std::vector<std::string> edge_ids(const RoadNetwork& net, std::span<const EdgeIdx> route);

}  // namespace tcal::net
