#include "doctest.h"
#include "support.hpp"
#include "tcal/fixtures.hpp"
#include "tcal/netmodel.hpp"

using namespace tcal;
using tcal::testing::bellman_ford;
using tcal::testing::make_network;

namespace {

const char* kMinimal = R"({
  "junctions": [{"id": "J1", "x": 0, "y": 0, "kind": "dead_end"},
                {"id": "J2", "x": 100, "y": 0, "kind": "dead_end"}],
  "edges": [{"id": "e1", "from": "J1", "to": "J2", "length": 100, "lane_count": 1,
             "speed_limit": 13.89, "category": "normal", "bus_only": false}],
  "tls": [], "bus_stops": [], "parking": [], "buildings": []
})";

std::string with_edge_to(const std::string& to) {
  std::string text = kMinimal;
  text.replace(text.find("\"to\": \"J2\""), 10, "\"to\": \"" + to + "\"");
  return text;
}

bool has_code(const std::vector<net::Violation>& vs, std::string_view code) {
  return std::any_of(vs.begin(), vs.end(), [&](const net::Violation& v) { return v.code == code; });
}

}  // namespace

TEST_CASE("minimal network parses") {
  const auto net = net::parse_network(kMinimal);
  CHECK(net.edge_count() == 1);
  CHECK(net.junctions().size() == 2);
  CHECK(net.edge(0).id == "e1");
}

TEST_CASE("unknown junction is a dangling reference naming it") {
  try {
    net::parse_network(with_edge_to("J9"));
    FAIL("expected DanglingReference");
  } catch (const DanglingReference& e) {
    CHECK(e.id() == "J9");
  }
}

TEST_CASE("malformed documents raise ParseError") {
  CHECK_THROWS_AS(net::parse_network("{"), ParseError);
  std::string extra = kMinimal;
  extra.insert(extra.rfind('}'), R"(, "surprise": 1)");
  CHECK_THROWS_AS(net::parse_network(extra), ParseError);
  std::string bad_kind = kMinimal;
  bad_kind.replace(bad_kind.find("\"normal\""), 8, "\"highway\"");
  CHECK_THROWS_AS(net::parse_network(bad_kind), ParseError);
}

TEST_CASE("grid fixture counts") {
  const auto grid = fixtures::grid_network({.gates = false});
  CHECK(grid.junctions().size() == 25);
  CHECK(grid.edge_count() == 80);
  const auto gated = fixtures::grid_network();
  CHECK(gated.edge_count() == 88);
}

TEST_CASE("grid fixture validates cleanly") {
  CHECK(net::validate_network(fixtures::grid_network()).empty());
  CHECK(net::validate_network(fixtures::two_route_network()).empty());
}

TEST_CASE("validation reports broken invariants") {
  auto parts = fixtures::grid_network().parts();
  SUBCASE("zero length") {
    parts.edges[3].length = 0.0;
    CHECK(has_code(net::validate_network(net::RoadNetwork::build(parts)), net::code::kNonpositiveLength));
  }
  SUBCASE("phase arity") {
    parts.tls[0].phases[1].state += "G";
    CHECK(has_code(net::validate_network(net::RoadNetwork::build(parts)), net::code::kPhaseArity));
  }
  SUBCASE("lane count") {
    parts.edges[0].lane_count = 0;
    CHECK(has_code(net::validate_network(net::RoadNetwork::build(parts)), net::code::kBadLaneCount));
  }
  SUBCASE("violations are sorted") {
    parts.edges[5].length = -1.0;
    parts.edges[1].speed_limit = 0.0;
    const auto vs = net::validate_network(net::RoadNetwork::build(parts));
    REQUIRE(vs.size() >= 2);
    CHECK(std::is_sorted(vs.begin(), vs.end(), [](const auto& a, const auto& b) {
      return std::tie(a.code, a.subject_id) < std::tie(b.code, b.subject_id);
    }));
  }
}

TEST_CASE("network JSON round trip") {
  const auto grid = fixtures::grid_network();
  const auto back = net::parse_network(net::network_to_json(grid));
  CHECK(back.parts() == grid.parts());
  CHECK(net::network_to_json(back) == net::network_to_json(grid));
}

TEST_CASE("routing identity case") {
  const auto net = make_network({"A", "B"}, {{"A", "B", 100.0, 10.0}});
  const auto r = net::shortest_path(net, 0, 0);
  REQUIRE(r);
  CHECK(r->edges == std::vector<EdgeIdx>{0});
  CHECK(r->cost == doctest::Approx(10.0));
}

TEST_CASE("routing prefers two cheap hops over one expensive edge") {
  // Entry and exit edges pin the start and end junctions.
  const auto net = make_network({"S", "A", "B", "C", "T"}, {{"S", "A", 10.0, 10.0},
                                                            {"A", "B", 10.0, 10.0},
                                                            {"B", "C", 10.0, 10.0},
                                                            {"A", "C", 30.0, 10.0},
                                                            {"C", "T", 10.0, 10.0}});
  const auto r = net::shortest_path(net, net.edge_index("S-A"), net.edge_index("C-T"));
  REQUIRE(r);
  CHECK(net::edge_ids(net, r->edges) == std::vector<std::string>{"S-A", "A-B", "B-C", "C-T"});
  CHECK(r->cost == doctest::Approx(4.0));
}

TEST_CASE("routing matches Bellman-Ford on random graphs") {
  std::mt19937_64 rng(2024);
  int compared = 0;
  for (int g = 0; g < 100; ++g) {
    const auto net = tcal::testing::random_network(rng, 2 + static_cast<int>(rng() % 49), 1 + static_cast<int>(rng() % 200));
    if (net.edge_count() == 0) continue;
    const auto cost = net::free_flow_costs(net);
    net::Router router(net);
    for (int q = 0; q < 10; ++q) {
      const EdgeIdx from = static_cast<EdgeIdx>(rng() % net.edge_count());
      const EdgeIdx to = static_cast<EdgeIdx>(rng() % net.edge_count());
      const auto got = router.route(from, to, cost);
      const auto want = bellman_ford(net, from, to, cost);
      REQUIRE(got.has_value() == want.has_value());
      if (!got) continue;
      double sum = 0.0;
      for (EdgeIdx e : got->edges) sum += cost[e];
      CHECK(got->cost == *want);
      CHECK(sum == doctest::Approx(got->cost).epsilon(1e-12));
      CHECK(got->edges.front() == from);
      CHECK(got->edges.back() == to);
      ++compared;
    }
  }
  CHECK(compared > 100);
}

TEST_CASE("bus-only edges are closed to cars") {
  auto parts = make_network({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}}).parts();
  parts.edges[1].bus_only = true;
  const auto net = net::RoadNetwork::build(parts);
  net::Router router(net);
  CHECK_FALSE(router.route(0, 1, net::car_free_flow_costs(net)));
  CHECK(router.route(0, 1, net::free_flow_costs(net)));
}
