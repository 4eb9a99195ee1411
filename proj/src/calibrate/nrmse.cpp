#include <cmath>

#include "tcal/calibrate.hpp"
#include "tcal/simd.hpp"

namespace tcal::calib {

double nrmse(std::span<const double> real, std::span<const double> sim) {
  if (real.size() != sim.size() || real.empty()) throw LengthMismatchError(real.size(), sim.size());
  const double n = static_cast<double>(real.size());
  const double mean = simd::sum(real) / n;
  if (!(mean > 0)) throw ZeroMeanError();
  return std::sqrt(simd::sum_sq_diff(real, sim) / n) / mean;
}

DetectorSeries aggregate_series(const std::vector<DetectorSeries>& series) {
  if (series.empty()) throw Error("aggregate_series: no series given");
  DetectorSeries total{"aggregate", std::vector<double>(kWindowsPerDay, 0.0), series.front().origin};
  for (const auto& s : series) {
    check_series(s);
    simd::accumulate(total.counts, s.counts);
  }
  return total;
}

}  // namespace tcal::calib
