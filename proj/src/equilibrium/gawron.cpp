#include <algorithm>
#include <cmath>

#include "tcal/equilibrium.hpp"

namespace tcal::eq {

RouteSet gawron_update(RouteSet rs, double experienced_cost, double beta, double alpha) {
  auto& alts = rs.alternatives;
  if (alts.empty() || rs.chosen_index >= alts.size()) return rs;
  const std::size_t r = rs.chosen_index;
  alts[r].cost = (1.0 - alpha) * alts[r].cost + alpha * std::max(0.0, experienced_cost);

  for (std::size_t s = 0; s < alts.size(); ++s) {
    if (s == r) continue;
    const double cr = alts[r].cost;
    const double cs = alts[s].cost;
    const double total_cost = cr + cs;
    const double delta = total_cost > 0 ? beta * (cs - cr) / total_cost : 0.0;
    const double pr = alts[r].probability;
    const double ps = alts[s].probability;
    const double mass = pr + ps;
    if (delta == 0.0 || !(mass > 0)) continue;
    double pr_new = pr * mass / (pr + ps * std::exp(-delta));
    // Rounding must not move mass away from the cheaper route.
    if (delta > 0) pr_new = std::max(pr_new, pr);
    if (delta < 0) pr_new = std::min(pr_new, pr);
    pr_new = std::clamp(pr_new, 0.0, mass);
    alts[r].probability = pr_new;
    alts[s].probability = std::max(0.0, mass - pr_new);
  }

  double sum = 0.0;
  for (const auto& a : alts) sum += a.probability;
  if (std::abs(sum - 1.0) > 1e-12 && sum > 0) {
    for (auto& a : alts) a.probability /= sum;
  }
  return rs;
}

bool convergence_check(const std::vector<IterationMetrics>& metrics, double tol, int window) {
  if (window <= 0 || metrics.size() < static_cast<std::size_t>(window)) return false;
  double lo = kInf, hi = -kInf;
  for (auto it = metrics.end() - window; it != metrics.end(); ++it) {
    lo = std::min(lo, it->avg_travel_time);
    hi = std::max(hi, it->avg_travel_time);
  }
  if (hi == lo) return true;
  return lo > 0 && (hi - lo) / lo < tol;
}

}  // namespace tcal::eq
