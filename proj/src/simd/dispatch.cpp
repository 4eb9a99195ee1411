#include <atomic>

#include "tcal/core.hpp"
#include "tcal/simd.hpp"

namespace tcal::simd {

namespace {

bool cpu_has_avx2() noexcept {
#if defined(TCAL_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

std::atomic<Level>& active() {
  static std::atomic<Level> level{detected_level()};
  return level;
}

}  // namespace

std::string_view to_string(Level level) noexcept {
  switch (level) {
    case Level::scalar:
      return "scalar";
    case Level::avx2:
      return "avx2";
  }
  return "unknown";
}

bool is_supported(Level level) noexcept {
  return level == Level::scalar || (level == Level::avx2 && cpu_has_avx2());
}

Level detected_level() noexcept { return cpu_has_avx2() ? Level::avx2 : Level::scalar; }

Level active_level() noexcept { return active().load(std::memory_order_relaxed); }

void force_level(Level level) {
  if (!is_supported(level)) {
    throw ConfigError("SIMD level '" + std::string(to_string(level)) + "' not supported here");
  }
  active().store(level, std::memory_order_relaxed);
}

void krauss_batch(const KraussScalars& p, std::span<const double> speed,
                  std::span<const double> leader_speed, std::span<const double> gap,
                  std::span<const double> v_max, std::span<const double> rand01,
                  std::span<double> out) {
#if defined(TCAL_HAVE_AVX2)
  if (active_level() == Level::avx2) {
    avx2::krauss_batch(p, speed, leader_speed, gap, v_max, rand01, out);
    return;
  }
#endif
  scalar::krauss_batch(p, speed, leader_speed, gap, v_max, rand01, out);
}

double sum_sq_diff(std::span<const double> a, std::span<const double> b) {
#if defined(TCAL_HAVE_AVX2)
  if (active_level() == Level::avx2) return avx2::sum_sq_diff(a, b);
#endif
  return scalar::sum_sq_diff(a, b);
}

double sum(std::span<const double> a) {
#if defined(TCAL_HAVE_AVX2)
  if (active_level() == Level::avx2) return avx2::sum(a);
#endif
  return scalar::sum(a);
}

void accumulate(std::span<double> dst, std::span<const double> src) {
#if defined(TCAL_HAVE_AVX2)
  if (active_level() == Level::avx2) {
    avx2::accumulate(dst, src);
    return;
  }
#endif
  scalar::accumulate(dst, src);
}

}  // namespace tcal::simd
