#include <algorithm>
#include <queue>

#include "tcal/netmodel.hpp"

namespace tcal::net {

double free_flow_time(const Edge& e) noexcept { return e.length / e.speed_limit; }

std::vector<double> free_flow_costs(const RoadNetwork& net) {
  std::vector<double> costs;
  costs.reserve(net.edge_count());
  for (const auto& e : net.edges()) costs.push_back(free_flow_time(e));
  return costs;
}

std::vector<double> car_free_flow_costs(const RoadNetwork& net) {
  std::vector<double> costs = free_flow_costs(net);
  for (EdgeIdx e = 0; e < net.edge_count(); ++e) {
    if (net.edge(e).bus_only) costs[e] = kInf;
  }
  return costs;
}

Router::Router(const RoadNetwork& net)
    : net_(&net), dist_(net.edge_count(), kInf), pred_(net.edge_count(), kNoEdge) {}

std::optional<Route> Router::route(EdgeIdx from, EdgeIdx to, std::span<const double> costs) {
  for (EdgeIdx e : touched_) {
    dist_[e] = kInf;
    pred_[e] = kNoEdge;
  }
  touched_.clear();
  if (!(costs[from] < kInf) || !(costs[to] < kInf)) return std::nullopt;

  using Entry = std::pair<double, EdgeIdx>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  dist_[from] = costs[from];
  touched_.push_back(from);
  open.emplace(dist_[from], from);

  bool found = false;
  while (!open.empty()) {
    const auto [d, e] = open.top();
    open.pop();
    if (d > dist_[e]) continue;
    if (e == to) {
      found = true;
      break;
    }
    for (EdgeIdx s : net_->successors(e)) {
      const double w = costs[s];
      if (!(w < kInf)) continue;
      const double nd = d + w;
      if (nd < dist_[s]) {
        if (dist_[s] == kInf) touched_.push_back(s);
        dist_[s] = nd;
        pred_[s] = e;
        open.emplace(nd, s);
      }
    }
  }
  if (!found) return std::nullopt;

  Route r;
  r.cost = dist_[to];
  for (EdgeIdx e = to; e != kNoEdge; e = pred_[e]) {
    r.edges.push_back(e);
    if (e == from) break;
  }
  std::reverse(r.edges.begin(), r.edges.end());
  return r;
}

std::optional<Route> shortest_path(const RoadNetwork& net, EdgeIdx from, EdgeIdx to, const EdgeWeight& weight) {
  std::vector<double> costs;
  if (weight) {
    costs.reserve(net.edge_count());
    for (const auto& e : net.edges()) costs.push_back(weight(e));
  } else {
    costs = free_flow_costs(net);
  }
  Router router(net);
  return router.route(from, to, costs);
}

}  // namespace tcal::net
