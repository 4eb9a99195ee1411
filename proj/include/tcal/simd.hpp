#pragma once

// Data-parallel inner loops of the simulator and the calibration objective.
//
// Every kernel has a scalar reference implementation (tcal::simd::scalar) and,
// on x86-64, an AVX2 variant (tcal::simd::avx2). The active variant is picked
// once at runtime from CPUID and can be forced for testing.
//
// The element-wise kernels (krauss_batch, accumulate) are bit-identical across
// variants: both use the same operation order, IEEE sqrt and no FMA. The
// reductions (sum, sum_sq_diff) differ only in summation order.

#include <span>
#include <string_view>

namespace tcal::simd {

enum class Level { scalar, avx2 };

std::string_view to_string(Level level) noexcept;

/// Best level supported by this build and this CPU.
Level detected_level() noexcept;
/// Level used by the dispatching entry points below.
Level active_level() noexcept;
/// Override the active level; throws tcal::ConfigError if unsupported.
void force_level(Level level);
bool is_supported(Level level) noexcept;

/// Scalar Krauss parameters shared by a batch.
struct KraussScalars {
  double accel;
  double decel;
  double tau;
  double sigma;
  double step;
};

/// out[i] = Krauss speed for follower i. Gaps below zero are treated as zero.
/// All spans must have the same length.
void krauss_batch(const KraussScalars& p, std::span<const double> speed,
                  std::span<const double> leader_speed, std::span<const double> gap,
                  std::span<const double> v_max, std::span<const double> rand01,
                  std::span<double> out);

/// Σ (a_i - b_i)^2
double sum_sq_diff(std::span<const double> a, std::span<const double> b);
/// Σ a_i
double sum(std::span<const double> a);
/// dst_i += src_i
void accumulate(std::span<double> dst, std::span<const double> src);

namespace scalar {
void krauss_batch(const KraussScalars& p, std::span<const double> speed,
                  std::span<const double> leader_speed, std::span<const double> gap,
                  std::span<const double> v_max, std::span<const double> rand01,
                  std::span<double> out);
double sum_sq_diff(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
void accumulate(std::span<double> dst, std::span<const double> src);
}  // namespace scalar

#if defined(TCAL_HAVE_AVX2)
namespace avx2 {
// Only callable when is_supported(Level::avx2).
void krauss_batch(const KraussScalars& p, std::span<const double> speed,
                  std::span<const double> leader_speed, std::span<const double> gap,
                  std::span<const double> v_max, std::span<const double> rand01,
                  std::span<double> out);
double sum_sq_diff(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
void accumulate(std::span<double> dst, std::span<const double> src);
}  // namespace avx2
#endif

}  // namespace tcal::simd
