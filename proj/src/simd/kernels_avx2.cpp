// Compiled with -mavx2 only; callers go through the runtime dispatcher.

#include <immintrin.h>

#include "tcal/simd.hpp"

namespace tcal::simd::avx2 {

void krauss_batch(const KraussScalars& p, std::span<const double> speed,
                  std::span<const double> leader_speed, std::span<const double> gap,
                  std::span<const double> v_max, std::span<const double> rand01,
                  std::span<double> out) {
  const double bt_s = p.decel * p.tau;
  const double accel_step_s = p.accel * p.step;
  const __m256d bt = _mm256_set1_pd(bt_s);
  const __m256d bt2 = _mm256_set1_pd(bt_s * bt_s);
  const __m256d two_b = _mm256_set1_pd(2.0 * p.decel);
  const __m256d accel_step = _mm256_set1_pd(accel_step_s);
  const __m256d dawdle = _mm256_set1_pd(p.sigma * accel_step_s);
  const __m256d zero = _mm256_setzero_pd();

  const std::size_t n = out.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_max_pd(_mm256_loadu_pd(gap.data() + i), zero);
    const __m256d vl = _mm256_loadu_pd(leader_speed.data() + i);
    const __m256d radicand =
        _mm256_add_pd(_mm256_add_pd(bt2, _mm256_mul_pd(vl, vl)), _mm256_mul_pd(two_b, g));
    const __m256d v_safe = _mm256_sub_pd(_mm256_sqrt_pd(radicand), bt);
    const __m256d v_acc = _mm256_add_pd(_mm256_loadu_pd(speed.data() + i), accel_step);
    const __m256d v_des =
        _mm256_min_pd(_mm256_min_pd(v_acc, v_safe), _mm256_loadu_pd(v_max.data() + i));
    const __m256d noise = _mm256_mul_pd(dawdle, _mm256_loadu_pd(rand01.data() + i));
    _mm256_storeu_pd(out.data() + i, _mm256_max_pd(_mm256_sub_pd(v_des, noise), zero));
  }
  if (i < n) {
    scalar::krauss_batch(p, speed.subspan(i), leader_speed.subspan(i), gap.subspan(i),
                         v_max.subspan(i), rand01.subspan(i), out.subspan(i));
  }
}

namespace {
double horizontal_sum(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}
}  // namespace

double sum_sq_diff(std::span<const double> a, std::span<const double> b) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= a.size(); i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double total = horizontal_sum(acc);
  for (; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    total += d * d;
  }
  return total;
}

double sum(std::span<const double> a) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= a.size(); i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a.data() + i));
  double total = horizontal_sum(acc);
  for (; i < a.size(); ++i) total += a[i];
  return total;
}

void accumulate(std::span<double> dst, std::span<const double> src) {
  std::size_t i = 0;
  for (; i + 4 <= dst.size(); i += 4) {
    _mm256_storeu_pd(dst.data() + i,
                     _mm256_add_pd(_mm256_loadu_pd(dst.data() + i), _mm256_loadu_pd(src.data() + i)));
  }
  for (; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace tcal::simd::avx2
