#include <cmath>

#include "tcal/simd.hpp"

namespace tcal::simd::scalar {

namespace {
// Same selection semantics as _mm256_min_pd / _mm256_max_pd (second operand
// wins on equality), so signed zeros match across variants.
inline double lane_min(double a, double b) { return a < b ? a : b; }
inline double lane_max(double a, double b) { return a > b ? a : b; }
}  // namespace

void krauss_batch(const KraussScalars& p, std::span<const double> speed,
                  std::span<const double> leader_speed, std::span<const double> gap,
                  std::span<const double> v_max, std::span<const double> rand01,
                  std::span<double> out) {
  // Operation order mirrors the AVX2 kernel exactly.
  const double bt = p.decel * p.tau;
  const double bt2 = bt * bt;
  const double two_b = 2.0 * p.decel;
  const double accel_step = p.accel * p.step;
  const double dawdle = p.sigma * accel_step;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double g = lane_max(gap[i], 0.0);
    const double vl = leader_speed[i];
    const double radicand = (bt2 + vl * vl) + two_b * g;
    const double v_safe = std::sqrt(radicand) - bt;
    const double v_des = lane_min(lane_min(speed[i] + accel_step, v_safe), v_max[i]);
    out[i] = lane_max(v_des - dawdle * rand01[i], 0.0);
  }
}

double sum_sq_diff(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double sum(std::span<const double> a) {
  double acc = 0.0;
  for (double x : a) acc += x;
  return acc;
}

void accumulate(std::span<double> dst, std::span<const double> src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace tcal::simd::scalar
