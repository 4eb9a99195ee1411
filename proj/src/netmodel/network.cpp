#include <algorithm>
#include <numeric>

#include "tcal/netmodel.hpp"

namespace tcal::net {

std::string_view to_string(JunctionKind k) noexcept {
  switch (k) {
    case JunctionKind::plain:
      return "plain";
    case JunctionKind::traffic_light:
      return "traffic_light";
    case JunctionKind::dead_end:
      return "dead_end";
  }
  return "?";
}

std::string_view to_string(RoadCategory c) noexcept {
  switch (c) {
    case RoadCategory::normal:
      return "normal";
    case RoadCategory::tunnel:
      return "tunnel";
    case RoadCategory::under_building:
      return "under_building";
    case RoadCategory::under_bridge:
      return "under_bridge";
  }
  return "?";
}

std::string_view to_string(TlsLogic l) noexcept {
  return l == TlsLogic::fixed ? "static" : "actuated";
}

double TlsProgram::cycle_time() const noexcept {
  double total = 0.0;
  for (const auto& p : phases) total += p.duration;
  return total;
}

namespace {

template <typename T>
void sort_by_id(std::vector<T>& items) {
  std::stable_sort(items.begin(), items.end(),
                   [](const T& a, const T& b) { return a.id < b.id; });
}

template <typename T>
void reject_duplicates(const std::vector<T>& sorted, std::string_view what) {
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].id == sorted[i - 1].id) {
      throw Error("duplicate " + std::string(what) + " id '" + sorted[i].id + "'");
    }
  }
}

}  // namespace

RoadNetwork RoadNetwork::build(NetworkParts parts) {
  sort_by_id(parts.junctions);
  sort_by_id(parts.edges);
  sort_by_id(parts.bus_stops);
  sort_by_id(parts.parking);
  sort_by_id(parts.buildings);
  std::stable_sort(parts.tls.begin(), parts.tls.end(),
                   [](const TlsProgram& a, const TlsProgram& b) { return a.junction_id < b.junction_id; });
  reject_duplicates(parts.junctions, "junction");
  reject_duplicates(parts.edges, "edge");
  reject_duplicates(parts.bus_stops, "bus stop");
  reject_duplicates(parts.parking, "parking area");
  reject_duplicates(parts.buildings, "building");

  // Polygons are stored closed.
  for (auto& b : parts.buildings) {
    if (!b.vertices.empty() && b.vertices.front() != b.vertices.back()) b.vertices.push_back(b.vertices.front());
  }

  RoadNetwork net;
  net.parts_ = std::move(parts);
  const auto& p = net.parts_;

  for (JunctionIdx j = 0; j < p.junctions.size(); ++j) net.junction_by_id_.emplace(p.junctions[j].id, j);
  for (EdgeIdx e = 0; e < p.edges.size(); ++e) net.edge_by_id_.emplace(p.edges[e].id, e);

  auto junction_ref = [&](const std::string& id, const std::string& context) {
    auto it = net.junction_by_id_.find(id);
    if (it == net.junction_by_id_.end()) throw DanglingReference(id, context);
    return it->second;
  };
  auto edge_ref = [&](const std::string& id, const std::string& context) {
    if (!net.edge_by_id_.contains(id)) throw DanglingReference(id, context);
  };

  net.out_.resize(p.junctions.size());
  net.in_.resize(p.junctions.size());
  net.edge_from_.reserve(p.edges.size());
  net.edge_to_.reserve(p.edges.size());
  for (EdgeIdx e = 0; e < p.edges.size(); ++e) {
    const auto& edge = p.edges[e];
    const JunctionIdx from = junction_ref(edge.from, "edge '" + edge.id + "'.from");
    const JunctionIdx to = junction_ref(edge.to, "edge '" + edge.id + "'.to");
    net.edge_from_.push_back(from);
    net.edge_to_.push_back(to);
    net.out_[from].push_back(e);
    net.in_[to].push_back(e);
  }
  net.approach_.assign(p.edges.size(), 0);
  for (const auto& incoming : net.in_) {
    for (std::size_t k = 0; k < incoming.size(); ++k) net.approach_[incoming[k]] = k;
  }

  net.junction_tls_.assign(p.junctions.size(), -1);
  for (std::size_t t = 0; t < p.tls.size(); ++t) {
    const JunctionIdx j = junction_ref(p.tls[t].junction_id, "tls program");
    if (net.junction_tls_[j] < 0) net.junction_tls_[j] = static_cast<int>(t);
  }
  for (const auto& s : p.bus_stops) edge_ref(s.edge_id, "bus stop '" + s.id + "'");
  for (const auto& pa : p.parking) edge_ref(pa.edge_id, "parking area '" + pa.id + "'");
  return net;
}

std::optional<EdgeIdx> RoadNetwork::find_edge(std::string_view id) const {
  auto it = edge_by_id_.find(std::string(id));
  if (it == edge_by_id_.end()) return std::nullopt;
  return it->second;
}

EdgeIdx RoadNetwork::edge_index(std::string_view id) const {
  if (auto e = find_edge(id)) return *e;
  throw DanglingReference(std::string(id), "edge lookup");
}

std::optional<JunctionIdx> RoadNetwork::find_junction(std::string_view id) const {
  auto it = junction_by_id_.find(std::string(id));
  if (it == junction_by_id_.end()) return std::nullopt;
  return it->second;
}

const TlsProgram* RoadNetwork::tls_at_end(EdgeIdx e) const {
  const int t = junction_tls_[edge_to_[e]];
  return t < 0 ? nullptr : &parts_.tls[static_cast<std::size_t>(t)];
}

std::vector<std::string> edge_ids(const RoadNetwork& net, std::span<const EdgeIdx> route) {
  std::vector<std::string> ids;
  ids.reserve(route.size());
  for (EdgeIdx e : route) ids.push_back(net.edge(e).id);
  return ids;
}

}  // namespace tcal::net
