#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "tcal/fixtures.hpp"
#include "tcal/microsim.hpp"

using namespace tcal;

namespace {

sim::CarFollowParams deterministic_car() {
  sim::CarFollowParams p;
  p.sigma = 0.0;
  return p;
}

sim::SimConfig short_run(double end, double sigma = 0.0) {
  sim::SimConfig c;
  c.end = end;
  c.car.sigma = sigma;
  return c;
}

demand::VehicleRoute route_on(const net::RoadNetwork& net, std::string id, double depart,
                              std::vector<std::string> edges) {
  demand::VehicleRoute r{std::move(id), {}, depart, false};
  for (const auto& e : edges) r.edges.push_back(net.edge_index(e));
  return r;
}

// A -> B -> C with a fixed signal at B whose only phase is the given state.
net::RoadNetwork signal_line(const std::string& state, double duration = 10000.0) {
  net::NetworkParts parts = testing::make_network({"A", "B", "C"}, {{"A", "B", 200.0, 13.89}, {"B", "C", 200.0, 13.89}}).parts();
  parts.junctions[1].kind = net::JunctionKind::traffic_light;
  parts.tls.push_back({"B", net::TlsLogic::fixed, {{duration, duration, duration, state}}});
  return net::RoadNetwork::build(std::move(parts));
}

std::vector<demand::VehicleRoute> grid_routes(const net::RoadNetwork& grid, int n, std::uint64_t seed) {
  auto expanded = demand::expand_routes(fixtures::random_trips(grid, n, seed), grid);
  demand::require_all_routed(expanded);
  return std::move(expanded.routes);
}

}  // namespace

TEST_CASE("Krauss speed examples") {
  auto p = deterministic_car();
  CHECK(sim::krauss_speed(0.0, 0.0, 0.0, p, 1.0, 0.5) == 0.0);

  p.v_max = 13.9;
  CHECK(sim::krauss_speed(10.0, 0.0, 1e6, p, 0.1, 0.5) == doctest::Approx(10.26).epsilon(1e-12));

  p.v_max = 55.56;
  const double v_safe = -4.5 + std::sqrt(20.25 + 18.0);
  CHECK(v_safe == doctest::Approx(1.6847).epsilon(1e-4));
  CHECK(sim::krauss_speed(30.0, 0.0, 2.0, p, 1.0, 0.5) == doctest::Approx(v_safe).epsilon(1e-12));
}

TEST_CASE("Krauss speed stays in the box") {
  auto p = sim::default_car();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20000; ++i) {
    const double v = 40.0 * u(rng), vl = 40.0 * u(rng), gap = 200.0 * u(rng) - 20.0;
    const double out = sim::krauss_speed(v, vl, gap, p, 1.0, u(rng));
    REQUIRE(out >= 0.0);
    REQUIRE(out <= p.v_max);
    REQUIRE(out <= v + p.accel + 1e-12);
  }
}

TEST_CASE("parameter and config checks") {
  auto p = sim::default_car();
  p.decel = 0.0;
  CHECK_THROWS_AS(sim::check_params(p, "car"), ConfigError);
  p = sim::default_car();
  p.sigma = 1.5;
  CHECK_THROWS_AS(sim::check_params(p, "car"), ConfigError);

  sim::SimConfig c;
  c.step_length = 0.0;
  CHECK_THROWS_AS(sim::check_config(c), ConfigError);
  c = {};
  c.end = kDaySeconds + 1.0;
  CHECK_THROWS_AS(sim::check_config(c), ConfigError);
  c = {};
  c.rerouting_probability = 1.2;
  CHECK_THROWS_AS(sim::check_config(c), ConfigError);
}

TEST_CASE("free-road arrival time matches the kinematics") {
  // Ramp 0 -> 10 m/s at 2.6 m/s^2 takes 3.85 s over 19.2 m, the rest at 10 m/s.
  const auto net = testing::line_network(1000.0, 10.0);
  auto cfg = short_run(400.0);
  const auto out = sim::run(net, {route_on(net, "v", 0.0, {"A-B"})}, {}, {}, cfg);
  REQUIRE(out.vehicles.size() == 1);
  CHECK(out.vehicles[0].arrived);
  CHECK(std::abs(out.vehicles[0].travel_time - 101.9) <= cfg.step_length);
  CHECK(out.vehicles[0].route_length == doctest::Approx(1000.0));
  CHECK(out.vehicles[0].time_loss >= 0.0);
}

TEST_CASE("vehicle stops before a red light") {
  const auto net = signal_line("r");
  sim::Simulation s(net, {route_on(net, "v", 0.0, {"A-B", "B-C"})}, {}, {}, short_run(120.0));
  double last_speed = 0.0;
  bool braking = false;
  while (!s.finished()) {
    s.step();
    const auto& v = s.vehicles()[0];
    if (v.status != sim::VehicleState::Status::running) continue;
    REQUIRE(v.route_index == 0);
    REQUIRE(v.position <= 200.0);
    if (v.speed < last_speed) braking = true;
    if (braking) REQUIRE(v.speed <= last_speed + 1e-12);
    last_speed = v.speed;
  }
  CHECK(last_speed == 0.0);
}

TEST_CASE("vehicle passes a green light") {
  const auto net = signal_line("G");
  const auto out = sim::run(net, {route_on(net, "v", 0.0, {"A-B", "B-C"})}, {}, {}, short_run(200.0));
  CHECK(out.vehicles[0].arrived);
}

TEST_CASE("a vehicle blocked too long is teleported") {
  const auto net = signal_line("r");
  auto cfg = short_run(1000.0);
  const auto out = sim::run(net, {route_on(net, "v", 0.0, {"A-B", "B-C"})}, {}, {}, cfg);
  CHECK(out.totals.teleports == 1);
  CHECK(out.vehicles[0].teleport_count == 1);
  CHECK(out.vehicles[0].arrived);
}

TEST_CASE("platoon gaps never go negative") {
  const auto net = testing::make_network({"A", "B", "C"}, {{"A", "B", 500.0, 13.89}, {"B", "C", 300.0, 4.0}});
  std::vector<demand::VehicleRoute> routes;
  for (int i = 0; i < 20; ++i) routes.push_back(route_on(net, "v" + std::to_string(10 + i), i * 1.0, {"A-B", "B-C"}));
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto cfg = short_run(600.0, 0.5);
    cfg.seed = seed;
    sim::Simulation s(net, routes, {}, {}, cfg);
    while (!s.finished()) {
      s.step();
      REQUIRE(s.min_gap() >= 0.0);
    }
    CHECK(s.totals().arrived == 20);
  }
}

TEST_CASE("zero trips give all-zero outputs") {
  const auto grid = fixtures::grid_network();
  const auto out = sim::run(grid, {}, {}, fixtures::grid_detectors(grid), {});
  CHECK(out.detector_series.size() == 24);
  for (const auto& [id, s] : out.detector_series) {
    CHECK(s.counts.size() == kWindowsPerDay);
    CHECK(std::all_of(s.counts.begin(), s.counts.end(), [](double c) { return c == 0.0; }));
  }
  CHECK(out.running_count.size() == 1440);
  CHECK(std::all_of(out.running_count.begin(), out.running_count.end(), [](long long c) { return c == 0; }));
  CHECK(out.totals == sim::Totals{});
}

TEST_CASE("one crossing counts once in its window") {
  const auto net = testing::line_network(1000.0, 10.0);
  const std::vector<sim::Detector> dets{{"D", "A-B", -1, 500.0}};
  const auto out = sim::run(net, {route_on(net, "v", 890.0, {"A-B"})}, {}, dets, short_run(3600.0));
  const auto& counts = out.detector_series.at("D").counts;
  // Reaches 500 m about 51.9 s after departure.
  CHECK(counts[1] == 1.0);
  double total = 0.0;
  for (double c : counts) total += c;
  CHECK(total == 1.0);
}

TEST_CASE("detector configuration errors") {
  const auto net = testing::line_network(1000.0, 10.0);
  CHECK_THROWS_AS(sim::Simulation(net, {}, {}, {{"D", "nope", -1, 10.0}}, {}), DanglingReference);
  CHECK_THROWS(sim::Simulation(net, {}, {}, {{"D", "A-B", -1, 2000.0}}, {}));
}

TEST_CASE("disconnected route is rejected") {
  const auto net = testing::make_network({"A", "B", "C", "D"}, {{"A", "B"}, {"C", "D"}});
  CHECK_THROWS_AS(sim::Simulation(net, {route_on(net, "v", 0.0, {"A-B", "C-D"})}, {}, {}, {}), ConfigError);
}

TEST_CASE("same seed gives identical output, different seed differs") {
  const auto grid = fixtures::grid_network();
  const auto routes = grid_routes(grid, 5000, 42);
  const auto dets = fixtures::grid_detectors(grid);
  sim::SimConfig cfg;
  cfg.seed = 42;
  const auto a = sim::run(grid, routes, {}, dets, cfg);
  const auto b = sim::run(grid, routes, {}, dets, cfg);
  CHECK(a == b);
  cfg.seed = 43;
  const auto c = sim::run(grid, routes, {}, dets, cfg);
  CHECK(sim::series_of(c) != sim::series_of(a));
}

TEST_CASE("conservation and speed bounds at every step") {
  const auto grid = fixtures::grid_network();
  const auto routes = grid_routes(grid, 3000, 8);
  sim::SimConfig cfg;
  cfg.seed = 8;
  cfg.rerouting_probability = 0.3;
  sim::Simulation s(grid, routes, fixtures::grid_bus_lines(grid), {}, cfg);
  const long long total = static_cast<long long>(s.vehicles().size());
  while (!s.finished()) {
    s.step();
    const auto t = s.totals();
    REQUIRE(t.departed == t.arrived + t.still_running);
    REQUIRE(t.departed + t.not_inserted == total);
    for (const auto& v : s.vehicles()) {
      if (v.status != sim::VehicleState::Status::running) continue;
      REQUIRE(v.speed >= 0.0);
      REQUIRE(v.speed <= grid.edge(v.route[v.route_index]).speed_limit + 1e-9);
      REQUIRE(v.speed <= s.params(v).v_max + 1e-9);
    }
  }
  CHECK(s.totals().arrived > 0);
}

TEST_CASE("buses dwell at their stops") {
  const auto grid = fixtures::grid_network();
  const auto lines = fixtures::grid_bus_lines(grid);
  REQUIRE_FALSE(lines.empty());
  const auto out = sim::run(grid, {}, lines, {}, {});
  double free = 0.0;
  for (const auto& e : lines[0].route) free += grid.edge(grid.edge_index(e)).length / grid.edge(grid.edge_index(e)).speed_limit;
  int buses = 0;
  for (const auto& v : out.vehicles) {
    if (v.kind != sim::VehicleKind::bus) continue;
    ++buses;
    CHECK(v.arrived);
    CHECK(v.travel_time >= free + lines[0].dwell * static_cast<double>(lines[0].stop_sequence.size()) - 1.0);
  }
  CHECK(buses == static_cast<int>(lines[0].departures.size()));
}

TEST_CASE("more demand means longer trips") {
  const auto net = fixtures::two_route_network();
  auto mean_tt = [&](int n) {
    auto routes = demand::expand_routes(fixtures::two_route_trips(n, 300.0), net).routes;
    const auto out = sim::run(net, routes, {}, {}, short_run(7200.0, 0.5));
    double sum = 0.0;
    for (const auto& v : out.vehicles) sum += v.travel_time;
    return sum / static_cast<double>(out.vehicles.size());
  };
  CHECK(mean_tt(20) < mean_tt(400));
}

TEST_CASE("static signal phases") {
  net::TlsProgram prog{"J", net::TlsLogic::fixed, {{30, 30, 30, "G"}, {30, 30, 30, "r"}}};
  CHECK(sim::static_phase_at(prog, 45.0) == 1);
  CHECK(sim::static_phase_at(prog, 0.0) == 0);
  CHECK(sim::static_phase_at(prog, 60.0) == 0);
  sim::TlsController c(prog);
  const bool none[] = {false};
  CHECK(sim::tls_step(c, none, 45.0) == 1);
  CHECK(c.signal(0) == 'r');
}

TEST_CASE("actuated signal holds for max_duration under continuous demand") {
  net::TlsProgram prog{"J", net::TlsLogic::actuated, {{30, 10, 45, "G"}, {30, 30, 30, "r"}}};
  sim::TlsController c(prog, 3.0);
  const bool busy[] = {true};
  double switched = -1.0;
  for (int t = 0; t <= 60 && switched < 0; ++t) {
    if (sim::tls_step(c, busy, t) == 1) switched = t;
  }
  CHECK(switched == 45.0);
}

TEST_CASE("actuated signal gaps out one step after min_duration") {
  net::TlsProgram prog{"J", net::TlsLogic::actuated, {{30, 10, 45, "G"}, {30, 30, 30, "r"}}};
  sim::TlsController c(prog, 3.0);
  double switched = -1.0;
  for (int t = 0; t <= 60 && switched < 0; ++t) {
    const bool occ[] = {t <= 7};
    if (sim::tls_step(c, occ, t) == 1) switched = t;
  }
  CHECK(switched == 11.0);
}

TEST_CASE("route, detector and bus line files round trip") {
  const auto grid = fixtures::grid_network();
  auto routes = grid_routes(grid, 50, 4);
  routes[3].equipped = true;
  CHECK(sim::parse_routes(sim::routes_to_json(grid, routes), grid) == routes);

  const auto dets = fixtures::grid_detectors(grid);
  CHECK(sim::parse_detectors(sim::detectors_to_json(dets)) == dets);
  const auto lines = fixtures::grid_bus_lines(grid);
  CHECK(sim::parse_bus_lines(sim::bus_lines_to_json(lines)) == lines);

  CHECK_THROWS_AS(sim::parse_routes(R"({"routes": [{"trip_id": "x"}]})", grid), ParseError);
  CHECK_THROWS_AS(sim::parse_routes(R"({"routes": [{"trip_id": "x", "depart": 0, "equipped": false, "edges": ["zz"]}]})", grid),
                  DanglingReference);
}

TEST_CASE("output files") {
  const auto net = testing::line_network(1000.0, 10.0);
  const std::vector<sim::Detector> dets{{"D", "A-B", -1, 500.0}};
  const auto out = sim::run(net, {route_on(net, "v", 0.0, {"A-B"})}, {}, dets, short_run(600.0));
  testing::TempDir dir("simout");
  sim::write_outputs(out, dir.path());
  const auto series = read_series_csv(dir / "detectors.csv", SeriesOrigin::simulated);
  CHECK(series == sim::series_of(out));
  CHECK(sim::vehicles_to_csv(out).starts_with("id,kind,arrived"));
  CHECK(std::filesystem::exists(dir / "running.csv"));
}

TEST_CASE("traffic merging onto a slower single lane keeps moving") {
  // Two lanes feed one slower lane. Followers track the moving tail across
  // the line instead of waiting for a full car length of free space.
  const auto net = testing::make_network({"A", "B", "C"}, {{"A", "B", 300.0, 13.89, 2}, {"B", "C", 300.0, 8.0}});
  std::vector<demand::VehicleRoute> routes;
  for (int i = 0; i < 40; ++i) routes.push_back(route_on(net, "v" + std::to_string(10 + i), 2.0 * i, {"A-B", "B-C"}));
  sim::Simulation s(net, routes, {}, {}, short_run(900.0));
  long long stopped_at_line = 0;
  while (!s.finished()) {
    s.step();
    REQUIRE(s.min_gap() >= 0.0);
    for (const auto& v : s.vehicles()) {
      if (v.status == sim::VehicleState::Status::running && v.route_index == 0 && v.position > 295.0)
        stopped_at_line += v.speed < 0.1;
    }
  }
  CHECK(s.totals().arrived == 40);
  CHECK(stopped_at_line == 0);
}
