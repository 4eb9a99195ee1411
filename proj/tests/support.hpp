#pragma once

// Small builders and independent oracles shared by the unit tests.

#include <algorithm>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "tcal/netmodel.hpp"

namespace tcal::testing {

struct EdgeSpec {
  std::string from;
  std::string to;
  double length = 100.0;
  double speed = 10.0;
  int lanes = 1;
};

/// Plain junctions at arbitrary coordinates; edge ids are "from-to".
inline net::RoadNetwork make_network(const std::vector<std::string>& junctions, const std::vector<EdgeSpec>& edges) {
  net::NetworkParts parts;
  double x = 0.0;
  for (const auto& j : junctions) parts.junctions.push_back({j, x += 100.0, 0.0, net::JunctionKind::plain});
  for (const auto& e : edges) {
    parts.edges.push_back({e.from + "-" + e.to, e.from, e.to, e.length, e.lanes, e.speed});
  }
  return net::RoadNetwork::build(std::move(parts));
}

/// A -> B straight road of one edge "A-B".
inline net::RoadNetwork line_network(double length, double speed, int lanes = 1) {
  return make_network({"A", "B"}, {{"A", "B", length, speed, lanes}});
}

/// Random directed multigraph-free network with `nj` junctions and up to `ne`
/// edges, lengths in [10, 1000] m and speeds in [5, 30] m/s.
inline net::RoadNetwork random_network(std::mt19937_64& rng, int nj, int ne) {
  std::vector<std::string> js;
  for (int i = 0; i < nj; ++i) js.push_back("n" + std::to_string(i));
  std::uniform_int_distribution<int> pick(0, nj - 1);
  std::uniform_real_distribution<double> len(10.0, 1000.0), speed(5.0, 30.0);
  std::vector<EdgeSpec> edges;
  std::vector<std::pair<int, int>> used;
  for (int k = 0; k < ne; ++k) {
    const int a = pick(rng), b = pick(rng);
    if (a == b || std::find(used.begin(), used.end(), std::pair{a, b}) != used.end()) continue;
    used.emplace_back(a, b);
    edges.push_back({js[a], js[b], len(rng), speed(rng)});
  }
  return make_network(js, edges);
}

/// Edge-based Bellman-Ford: cost of a route counts every edge on it,
/// including the first and the last.
inline std::optional<double> bellman_ford(const net::RoadNetwork& net, EdgeIdx from, EdgeIdx to,
                                          const std::vector<double>& cost) {
  std::vector<double> dist(net.edge_count(), kInf);
  dist[from] = cost[from];
  for (std::size_t round = 0; round < net.edge_count(); ++round) {
    bool changed = false;
    for (EdgeIdx e = 0; e < net.edge_count(); ++e) {
      if (dist[e] == kInf) continue;
      for (EdgeIdx s : net.successors(e)) {
        if (dist[e] + cost[s] < dist[s]) {
          dist[s] = dist[e] + cost[s];
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  if (dist[to] == kInf) return std::nullopt;
  return dist[to];
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("tcal_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace tcal::testing
