#include <algorithm>
#include <cmath>
#include <set>

#include "tcal/netmodel.hpp"

namespace tcal::net {

namespace {

class Collector {
 public:
  void add(std::string_view code, const std::string& subject, std::string message) {
    out_.push_back({std::string(code), subject, std::move(message)});
  }
  std::vector<Violation> take() {
    std::sort(out_.begin(), out_.end(), [](const Violation& a, const Violation& b) {
      return std::tie(a.code, a.subject_id, a.message) < std::tie(b.code, b.subject_id, b.message);
    });
    out_.erase(std::unique(out_.begin(), out_.end()), out_.end());
    return std::move(out_);
  }

 private:
  std::vector<Violation> out_;
};

bool valid_state(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == 'G' || c == 'y' || c == 'r'; });
}

}  // namespace

std::vector<Violation> validate_network(const RoadNetwork& net) {
  Collector v;

  for (const auto& j : net.junctions()) {
    if (!std::isfinite(j.x) || !std::isfinite(j.y)) v.add(code::kNonfiniteCoord, j.id, "junction coordinates not finite");
  }
  for (const auto& e : net.edges()) {
    if (!(e.length > 0.0) || !std::isfinite(e.length)) v.add(code::kNonpositiveLength, e.id, "length must be > 0");
    if (e.lane_count < 1) v.add(code::kBadLaneCount, e.id, "lane_count must be >= 1");
    if (!(e.speed_limit > 0.0) || !std::isfinite(e.speed_limit)) {
      v.add(code::kNonpositiveSpeed, e.id, "speed_limit must be > 0");
    }
  }

  // Signals.
  std::vector<int> programs_per_junction(net.junctions().size(), 0);
  for (const auto& t : net.tls_programs()) {
    const JunctionIdx j = *net.find_junction(t.junction_id);
    ++programs_per_junction[j];
    if (net.junctions()[j].kind != JunctionKind::traffic_light) {
      v.add(code::kTlsNotSignalized, t.junction_id, "program on a junction that is not a traffic light");
    }
    if (t.phases.empty()) {
      v.add(code::kEmptyProgram, t.junction_id, "program has no phases");
      continue;
    }
    const std::size_t connections = net.incoming(j).size();
    for (std::size_t i = 0; i < t.phases.size(); ++i) {
      const auto& p = t.phases[i];
      const std::string where = "phase " + std::to_string(i);
      if (p.state.size() != connections) {
        v.add(code::kPhaseArity, t.junction_id,
              where + " has " + std::to_string(p.state.size()) + " signals for " + std::to_string(connections) +
                  " connections");
      }
      if (!valid_state(p.state)) v.add(code::kPhaseState, t.junction_id, where + " state uses letters outside {G,y,r}");
      if (!(p.duration > 0.0) || !(p.min_duration <= p.duration) || !(p.duration <= p.max_duration)) {
        v.add(code::kPhaseDuration, t.junction_id, where + " needs 0 < duration and min <= duration <= max");
      }
    }
  }
  for (JunctionIdx j = 0; j < net.junctions().size(); ++j) {
    const auto& junction = net.junctions()[j];
    if (junction.kind == JunctionKind::traffic_light && programs_per_junction[j] == 0) {
      v.add(code::kMissingTls, junction.id, "traffic light junction without a program");
    }
    if (programs_per_junction[j] > 1) v.add(code::kDuplicateTls, junction.id, "more than one program");
  }

  for (const auto& s : net.bus_stops()) {
    const auto& e = net.edge(*net.find_edge(s.edge_id));
    if (!(s.position >= 0.0) || s.position > e.length) v.add(code::kStopPosition, s.id, "position outside its edge");
  }
  for (const auto& p : net.parking_areas()) {
    if (p.capacity < 0 || p.initial_occupancy < 0 || p.initial_occupancy > p.capacity) {
      v.add(code::kParkingOccupancy, p.id, "need 0 <= initial_occupancy <= capacity");
    }
  }
  for (const auto& b : net.buildings()) {
    std::set<std::pair<double, double>> distinct;
    for (const auto& pt : b.vertices) distinct.emplace(pt.x, pt.y);
    const bool closed = !b.vertices.empty() && b.vertices.front() == b.vertices.back();
    if (distinct.size() < 3 || !closed) v.add(code::kDegeneratePolygon, b.id, "polygon needs 3 distinct vertices");
  }

  // Every edge must be enterable from some demand-capable (non bus-only) edge,
  // unless it starts at a dead end, where traffic enters the network.
  std::vector<char> reached(net.edge_count(), 0);
  for (EdgeIdx e = 0; e < net.edge_count(); ++e) {
    if (net.edge(e).bus_only) continue;
    for (EdgeIdx s : net.successors(e)) {
      if (s != e) reached[s] = 1;
    }
  }
  // Propagate along bus-only edges too: they are reachable through any path.
  bool changed = true;
  while (changed) {
    changed = false;
    for (EdgeIdx e = 0; e < net.edge_count(); ++e) {
      if (!reached[e]) continue;
      for (EdgeIdx s : net.successors(e)) {
        if (!reached[s]) {
          reached[s] = 1;
          changed = true;
        }
      }
    }
  }
  for (EdgeIdx e = 0; e < net.edge_count(); ++e) {
    const auto& from = net.junctions()[net.from_junction(e)];
    if (!reached[e] && from.kind != JunctionKind::dead_end) {
      v.add(code::kUnreachableEdge, net.edge(e).id, "no demand-capable edge leads here");
    }
  }
  return v.take();
}

}  // namespace tcal::net
