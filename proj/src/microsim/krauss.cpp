#include <cmath>

#include "tcal/microsim.hpp"
#include "tcal/simd.hpp"

namespace tcal::sim {

CarFollowParams default_car() noexcept { return {}; }

CarFollowParams default_bus() noexcept {
  CarFollowParams p;
  p.accel = 1.2;
  p.decel = 4.0;
  p.v_max = 22.0;
  p.veh_length = 12.0;
  return p;
}

void check_params(const CarFollowParams& p, std::string_view what) {
  auto bad = [&](const char* field, const char* rule) {
    throw ConfigError(std::string(what) + "." + field + " " + rule);
  };
  if (!(p.accel > 0)) bad("accel", "must be > 0");
  if (!(p.decel > 0)) bad("decel", "must be > 0");
  if (!(p.v_max > 0)) bad("v_max", "must be > 0");
  if (!(p.tau > 0)) bad("tau", "must be > 0");
  if (!(p.veh_length > 0)) bad("veh_length", "must be > 0");
  if (!(p.sigma >= 0 && p.sigma <= 1)) bad("sigma", "must lie in [0, 1]");
  if (!(p.min_gap >= 0)) bad("min_gap", "must be >= 0");
}

double krauss_speed(double v, double v_leader, double gap, const CarFollowParams& p, double step,
                    double rand01) {
  const simd::KraussScalars k{p.accel, p.decel, p.tau, p.sigma, step};
  double out = 0.0;
  simd::scalar::krauss_batch(k, {&v, 1}, {&v_leader, 1}, {&gap, 1}, {&p.v_max, 1}, {&rand01, 1}, {&out, 1});
  return out;
}

}  // namespace tcal::sim
