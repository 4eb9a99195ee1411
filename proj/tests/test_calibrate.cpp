#include "doctest.h"
#include "support.hpp"
#include "tcal/calibrate.hpp"

using namespace tcal;

namespace {

// Direct evaluation in long double.
double nrmse_oracle(const std::vector<double>& r, const std::vector<double>& s) {
  long double se = 0, mean = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    se += (static_cast<long double>(r[i]) - s[i]) * (static_cast<long double>(r[i]) - s[i]);
    mean += r[i];
  }
  mean /= r.size();
  return static_cast<double>(std::sqrt(se / r.size()) / mean);
}

std::vector<double> random_counts(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 500.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

DetectorSeries series(std::string id, std::vector<double> counts) {
  return {std::move(id), std::move(counts), SeriesOrigin::real};
}

struct LineScenario {
  net::RoadNetwork net = testing::line_network(1000.0, 13.89);
  calib::SweepInputs in;
  LineScenario() {
    in.net = &net;
    for (int i = 0; i < 20; ++i) in.routes.push_back({"v" + std::to_string(i), {0}, 600.0 * i, false});
    in.detectors = {{"D1", "A-B", -1, 500.0}};
    in.sim.end = 86400.0;
    in.sim.step_length = 0.5;
    const auto out = sim::run(net, in.routes, {}, in.detectors, in.sim);
    in.real = sim::series_of(out);
    for (auto& s : in.real) s.origin = SeriesOrigin::real;
  }
};

}  // namespace

TEST_CASE("nrmse known values") {
  const std::vector<double> r{1, 2, 3}, s{2, 2, 2};
  CHECK(calib::nrmse(r, s) == doctest::Approx(0.408248290463863).epsilon(1e-12));
  CHECK(std::abs(calib::nrmse(r, s) - 0.408248) < 1e-6);
  const std::vector<double> r2{10, 10}, s2{12, 8};
  CHECK(calib::nrmse(r2, s2) == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("nrmse of a series with itself is zero") {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 100; ++i) {
    const auto x = random_counts(rng, 96);
    CHECK(calib::nrmse(x, x) == 0.0);
  }
}

TEST_CASE("nrmse matches the oracle and is scale covariant") {
  std::mt19937_64 rng(10);
  for (int i = 0; i < 100; ++i) {
    const auto r = random_counts(rng, 1 + rng() % 200);
    const auto s = random_counts(rng, r.size());
    const double base = calib::nrmse(r, s);
    CHECK(base == doctest::Approx(nrmse_oracle(r, s)).epsilon(1e-12));
    for (double k : {0.001, 3.0, 1e6}) {
      std::vector<double> rk(r), sk(s);
      for (auto& x : rk) x *= k;
      for (auto& x : sk) x *= k;
      CHECK(std::abs(calib::nrmse(rk, sk) - base) <= 1e-12 * std::max(1.0, base));
    }
  }
}

TEST_CASE("nrmse rejects bad input") {
  const std::vector<double> zero{0, 0}, two{1, 2}, three{1, 2, 3};
  CHECK_THROWS_AS(calib::nrmse(zero, two), calib::ZeroMeanError);
  CHECK_THROWS_AS(calib::nrmse(two, three), calib::LengthMismatchError);
}

TEST_CASE("aggregate is the window-wise sum") {
  std::mt19937_64 rng(11);
  std::vector<DetectorSeries> all;
  for (int d = 0; d < 24; ++d) all.push_back(series("D" + std::to_string(d), random_counts(rng, 96)));
  const auto total = calib::aggregate_series(all);
  REQUIRE(total.counts.size() == 96);
  for (std::size_t w = 0; w < 96; ++w) {
    long double sum = 0;
    for (const auto& s : all) sum += s.counts[w];
    CHECK(total.counts[w] == doctest::Approx(static_cast<double>(sum)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(calib::aggregate_series({}), Error);
  CHECK_THROWS_AS(calib::aggregate_series({series("x", {1, 2})}), Error);
}

TEST_CASE("grid points") {
  CHECK(calib::grid_points({0.0, 1.0, 0.25}) == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(calib::grid_points({0.0, 1.0, 0.05}).size() == 21);
  CHECK(calib::grid_points({0.0, 1.0, 0.01}).size() == 101);
  CHECK(calib::grid_points({0.5, 0.5, 0.1}) == std::vector<double>{0.5});
}

TEST_CASE("argmin ties go to the smaller p") {
  const auto r = calib::select_best({{0.2, 0.3}, {0.1, 0.3}, {0.3, 0.5}});
  CHECK(r.best_p == 0.1);
  CHECK(r.best_nrmse == 0.3);
  CHECK(r.entries.front().p == 0.1);
}

TEST_CASE("single point sweep") {
  const LineScenario sc;
  const auto r = calib::sweep_rerouting_probability(sc.in, {0.5, 0.5, 0.1}, sc.in.sim.seed);
  REQUIRE(r.entries.size() == 1);
  CHECK(r.best_p == 0.5);
  CHECK(r.best_nrmse == 0.0);
  CHECK(calib::sweep_to_csv(r) == "p,nrmse\n0.5,0\nbest_p,best_nrmse\n0.5,0\n");
}

TEST_CASE("sweep is independent of the worker count") {
  const LineScenario sc;
  const calib::Grid grid{0.0, 1.0, 0.25};
  const auto one = calib::sweep_rerouting_probability(sc.in, grid, 3, 1);
  const auto four = calib::sweep_rerouting_probability(sc.in, grid, 3, 4);
  CHECK(one == four);
  // Rerouting cannot change anything on a single edge, so every p ties.
  CHECK(one.best_p == 0.0);
}

TEST_CASE("sweep CSV round trip") {
  const calib::SweepResult r = calib::select_best({{0.0, 0.25}, {0.05, 0.125}, {0.1, 1.0 / 3.0}});
  CHECK(calib::parse_sweep_csv(calib::sweep_to_csv(r)) == r);
  CHECK_THROWS_AS(calib::parse_sweep_csv("p,nrmse\n0.1\n"), ParseError);
}
