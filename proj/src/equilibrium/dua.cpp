#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "common/strict_json.hpp"
#include "tcal/equilibrium.hpp"

namespace tcal::eq {

void check_config(const DuaConfig& c) {
  auto fail = [](const std::string& msg) { throw ConfigError("equilibrium config: " + msg); };
  if (c.max_iter < 1) fail("max_iter must be >= 1");
  if (!(c.tol > 0)) fail("tol must be > 0");
  if (c.window < 1) fail("window must be >= 1");
  if (!(c.beta > 0)) fail("beta must be > 0");
  if (!(c.alpha > 0 && c.alpha <= 1)) fail("alpha must lie in (0, 1]");
  if (c.max_alternatives < 1) fail("max_alternatives must be >= 1");
  if (!(c.cost_smoothing > 0 && c.cost_smoothing <= 1)) fail("cost_smoothing must lie in (0, 1]");
  sim::check_config(c.sim);
}

IterationMetrics metrics_of(const sim::SimOutput& out, int iteration) {
  IterationMetrics m;
  m.iteration = iteration;
  double speed = 0.0, loss = 0.0, travel = 0.0;
  std::size_t n = 0;
  for (const auto& v : out.vehicles) {
    if (!v.arrived) continue;
    ++n;
    travel += v.travel_time;
    loss += v.time_loss;
    speed += v.travel_time > 0 ? v.route_length / v.travel_time : 0.0;
  }
  if (n > 0) {
    m.avg_speed = speed / static_cast<double>(n);
    m.time_loss = loss / static_cast<double>(n);
    m.avg_travel_time = travel / static_cast<double>(n);
  }
  return m;
}

namespace {

double route_cost(std::span<const EdgeIdx> route, std::span<const double> edge_cost) {
  double c = 0.0;
  for (EdgeIdx e : route) c += edge_cost[e];
  return c;
}

// Smoothed edge travel times by entry-time bin.
class TimeCosts {
 public:
  TimeCosts(std::span<const double> per_edge, double interval)
      : bins_(static_cast<std::size_t>(std::ceil(kDaySeconds / interval))), interval_(interval) {
    cost_.reserve(per_edge.size() * bins_);
    for (double c : per_edge) cost_.insert(cost_.end(), bins_, c);
  }

  // Blend in one simulation; weight 1 replaces.
  void blend(const sim::SimOutput& out, double weight) {
    for (std::size_t k = 0; k < cost_.size(); ++k) {
      if (!(cost_[k] < kInf)) continue;
      cost_[k] = weight * out.edge_time_bins[k] + (1.0 - weight) * cost_[k];
    }
  }

  double at(EdgeIdx e, double t) const {
    const auto b = std::min(bins_ - 1, static_cast<std::size_t>(std::max(0.0, t) / interval_));
    return cost_[e * bins_ + b];
  }

  // Walks the route from its departure time.
  double route(std::span<const EdgeIdx> r, double depart) const {
    double t = depart;
    for (EdgeIdx e : r) t += at(e, t);
    return t - depart;
  }

  void snapshot(double t, std::vector<double>& out) const {
    const std::size_t n = cost_.size() / bins_;
    out.resize(n);
    for (EdgeIdx e = 0; e < n; ++e) out[e] = at(e, t);
  }

 private:
  std::size_t bins_;
  double interval_;
  std::vector<double> cost_;
};

std::vector<demand::VehicleRoute> chosen_routes(const std::vector<RouteSet>& sets, const std::vector<double>& depart) {
  std::vector<demand::VehicleRoute> routes;
  routes.reserve(sets.size());
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const auto& rs = sets[i];
    routes.push_back({rs.trip_id, rs.alternatives[rs.chosen_index].route, depart[i], false});
  }
  return routes;
}

}  // namespace

DuaResult dua_iterate(const net::RoadNetwork& net, const demand::TripTable& trips, const DuaConfig& config) {
  check_config(config);
  const auto expanded = demand::expand_routes(trips, net);
  demand::require_all_routed(expanded);

  sim::SimConfig sim_cfg = config.sim;
  sim_cfg.rerouting_probability = 0.0;
  sim_cfg.seed = config.seed;
  const std::uint64_t eq_key = substream_seed(config.seed, "equilibrium");

  std::vector<RouteSet> sets;
  std::vector<double> depart;
  const std::vector<double> free_costs = net::car_free_flow_costs(net);
  for (const auto& r : expanded.routes) {
    sets.push_back({r.trip_id, {{r.edges, route_cost(r.edges, free_costs), 1.0}}, 0});
    depart.push_back(r.depart);
  }

  TimeCosts smoothed(free_costs, sim_cfg.edge_cost_interval);
  std::vector<double> snapshot;
  net::Router router(net);
  DuaResult result;

  for (int it = 0; it < config.max_iter; ++it) {
    const auto routes = chosen_routes(sets, depart);
    const sim::SimOutput out = sim::run(net, routes, {}, {}, sim_cfg);
    result.metrics.push_back(metrics_of(out, it));
    result.routes = routes;
    if (convergence_check(result.metrics, config.tol, config.window)) {
      result.converged = true;
      break;
    }
    if (it + 1 == config.max_iter) break;

    smoothed.blend(out, it == 0 ? 1.0 : config.cost_smoothing);

    std::unordered_map<std::string_view, const sim::VehicleResult*> experienced;
    for (const auto& v : out.vehicles) experienced.emplace(v.id, &v);

    for (std::size_t i = 0; i < sets.size(); ++i) {
      RouteSet& rs = sets[i];
      for (std::size_t a = 0; a < rs.alternatives.size(); ++a) {
        if (a != rs.chosen_index) rs.alternatives[a].cost = smoothed.route(rs.alternatives[a].route, depart[i]);
      }
      const auto hit = experienced.find(rs.trip_id);
      const double cost = hit != experienced.end() && hit->second->arrived
                              ? hit->second->travel_time
                              : smoothed.route(rs.alternatives[rs.chosen_index].route, depart[i]);
      rs = gawron_update(std::move(rs), cost, config.beta, config.alpha);

      const auto& chosen = rs.alternatives[rs.chosen_index].route;
      smoothed.snapshot(depart[i], snapshot);
      const auto best = router.route(chosen.front(), chosen.back(), snapshot);
      if (best && std::none_of(rs.alternatives.begin(), rs.alternatives.end(),
                               [&](const Alternative& a) { return a.route == best->edges; })) {
        const double n = static_cast<double>(rs.alternatives.size());
        for (auto& a : rs.alternatives) a.probability *= n / (n + 1.0);
        rs.alternatives.push_back({best->edges, smoothed.route(best->edges, depart[i]), 1.0 / (n + 1.0)});
        if (rs.alternatives.size() > config.max_alternatives) {
          const auto worst = std::max_element(rs.alternatives.begin(), rs.alternatives.end(),
                                              [](const Alternative& x, const Alternative& y) { return x.cost < y.cost; });
          rs.alternatives.erase(worst);
          double sum = 0.0;
          for (const auto& a : rs.alternatives) sum += a.probability;
          for (auto& a : rs.alternatives) a.probability = sum > 0 ? a.probability / sum : 1.0 / rs.alternatives.size();
        }
      }

      const double u = uniform01(eq_key, static_cast<std::uint64_t>(it), i);
      double acc = 0.0;
      rs.chosen_index = rs.alternatives.size() - 1;
      for (std::size_t a = 0; a < rs.alternatives.size(); ++a) {
        acc += rs.alternatives[a].probability;
        if (u < acc) {
          rs.chosen_index = a;
          break;
        }
      }
    }
  }
  result.route_sets = std::move(sets);
  return result;
}

std::string metrics_to_csv(const std::vector<IterationMetrics>& metrics) {
  std::string out = "iteration,avg_speed,time_loss,avg_travel_time\n";
  for (const auto& m : metrics) {
    out += std::to_string(m.iteration) + "," + format_number(m.avg_speed) + "," + format_number(m.time_loss) + "," +
           format_number(m.avg_travel_time) + "\n";
  }
  return out;
}

void write_metrics(const std::vector<IterationMetrics>& metrics, const std::filesystem::path& path) {
  detail::write_text_file(path.string(), metrics_to_csv(metrics));
}

}  // namespace tcal::eq
