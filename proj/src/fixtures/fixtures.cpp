#include <algorithm>
#include <cmath>
#include <random>

#include "tcal/fixtures.hpp"

namespace tcal::fixtures {

namespace {

std::string jid(int r, int c) { return "J" + std::to_string(r) + "_" + std::to_string(c); }
std::string eid(const std::string& from, const std::string& to) { return from + "-" + to; }

struct Gate {
  std::string id;
  int r, c;      // grid junction it attaches to
  double dx, dy;  // offset of the dead end
};

std::vector<Gate> gate_layout(const GridOptions& o) {
  const int mr = o.rows / 2, mc = o.cols / 2;
  return {{"GN", 0, mc, 0.0, -1.0}, {"GS", o.rows - 1, mc, 0.0, 1.0}, {"GW", mr, 0, -1.0, 0.0}, {"GE", mr, o.cols - 1, 1.0, 0.0}};
}

}  // namespace

net::RoadNetwork grid_network(const GridOptions& o) {
  net::NetworkParts parts;
  for (int r = 0; r < o.rows; ++r) {
    for (int c = 0; c < o.cols; ++c) {
      const bool interior = r > 0 && r < o.rows - 1 && c > 0 && c < o.cols - 1;
      parts.junctions.push_back({jid(r, c), c * o.spacing, r * o.spacing,
                                 interior ? net::JunctionKind::traffic_light : net::JunctionKind::plain});
    }
  }
  auto add_edge = [&](const std::string& a, const std::string& b, double length, int lanes) {
    parts.edges.push_back({eid(a, b), a, b, length, lanes, o.speed, net::RoadCategory::normal, false});
  };
  for (int r = 0; r < o.rows; ++r) {
    for (int c = 0; c < o.cols; ++c) {
      if (c + 1 < o.cols) {
        add_edge(jid(r, c), jid(r, c + 1), o.spacing, o.lanes);
        add_edge(jid(r, c + 1), jid(r, c), o.spacing, o.lanes);
      }
      if (r + 1 < o.rows) {
        add_edge(jid(r, c), jid(r + 1, c), o.spacing, o.lanes);
        add_edge(jid(r + 1, c), jid(r, c), o.spacing, o.lanes);
      }
    }
  }
  if (o.gates) {
    for (const auto& g : gate_layout(o)) {
      parts.junctions.push_back(
          {g.id, g.c * o.spacing + g.dx * o.spacing, g.r * o.spacing + g.dy * o.spacing, net::JunctionKind::dead_end});
      add_edge(g.id, jid(g.r, g.c), o.spacing, o.lanes);
      add_edge(jid(g.r, g.c), g.id, o.spacing, o.lanes);
    }
  }

  // Controlled connections are the incoming edges in id order; an approach
  // is horizontal when it comes from the same row.
  std::sort(parts.edges.begin(), parts.edges.end(), [](const net::Edge& a, const net::Edge& b) { return a.id < b.id; });
  for (int r = 1; r + 1 < o.rows; ++r) {
    for (int c = 1; c + 1 < o.cols; ++c) {
      const std::string j = jid(r, c);
      std::string horizontal;
      for (const auto& e : parts.edges) {
        if (e.to != j) continue;
        horizontal += e.from.rfind("J" + std::to_string(r) + "_", 0) == 0 ? 'h' : 'v';
      }
      auto state = [&](char h, char v) {
        std::string s;
        for (char k : horizontal) s += k == 'h' ? h : v;
        return s;
      };
      net::TlsProgram prog;
      prog.junction_id = j;
      prog.logic = o.logic;
      prog.phases = {{27.0, 10.0, 45.0, state('G', 'r')},
                     {3.0, 3.0, 3.0, state('y', 'r')},
                     {27.0, 10.0, 45.0, state('r', 'G')},
                     {3.0, 3.0, 3.0, state('r', 'y')}};
      parts.tls.push_back(std::move(prog));
    }
  }

  const int mr = o.rows / 2;
  if (o.cols >= 4) {
    parts.bus_stops.push_back({"BS_west", eid(jid(mr, 0), jid(mr, 1)), o.spacing / 2, "West Gate"});
    parts.bus_stops.push_back({"BS_centre", eid(jid(mr, 2), jid(mr, 3)), o.spacing / 2, "Centre"});
  }
  parts.parking.push_back({"P_north", eid(jid(0, 0), jid(0, 1)), 40, 5});
  parts.parking.push_back({"P_south", eid(jid(o.rows - 1, o.cols - 1), jid(o.rows - 1, o.cols - 2)), 60, 10});
  for (int r = 0; r + 1 < o.rows; r += 2) {
    for (int c = 0; c + 1 < o.cols; c += 2) {
      const double x = c * o.spacing + 0.2 * o.spacing, y = r * o.spacing + 0.2 * o.spacing, w = 0.6 * o.spacing;
      parts.buildings.push_back({"B" + std::to_string(r) + "_" + std::to_string(c),
                                 {{x, y}, {x + w, y}, {x + w, y + w}, {x, y + w}}});
    }
  }
  return net::RoadNetwork::build(std::move(parts));
}

net::RoadNetwork two_route_network(double scale) {
  using K = net::JunctionKind;
  net::NetworkParts parts;
  parts.junctions = {{"S", -300 * scale, 0, K::dead_end},
                     {"A", 0, 0, K::plain},
                     {"U", 250 * scale, 100 * scale, K::plain},
                     {"L", 250 * scale, -100 * scale, K::plain},
                     {"B", 500 * scale, 0, K::plain},
                     {"T", 800 * scale, 0, K::dead_end}};
  auto edge = [&](std::string id, std::string from, std::string to, double len, int lanes, double speed) {
    parts.edges.push_back({std::move(id), std::move(from), std::move(to), len * scale, lanes, speed,
                           net::RoadCategory::normal, false});
  };
  edge("in", "S", "A", 300, 2, 13.89);
  edge("up1", "A", "U", 250, 1, 8.0);
  edge("up2", "U", "B", 250, 1, 8.0);
  edge("lo1", "A", "L", 250, 1, 8.0);
  edge("lo2", "L", "B", 250, 1, 8.0);
  edge("out", "B", "T", 300, 2, 13.89);
  return net::RoadNetwork::build(std::move(parts));
}

demand::TripTable two_route_trips(int n, double span) {
  demand::TripTable t;
  for (int i = 0; i < n; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "v%03d", i);
    t.trips.push_back({id, std::floor(span * i / n), "in", "out", demand::Purpose::work});
  }
  return t;
}

demand::TripTable random_trips(const net::RoadNetwork& net, int n, std::uint64_t seed) {
  std::vector<EdgeIdx> car_edges;
  for (EdgeIdx e = 0; e < net.edge_count(); ++e) {
    if (!net.edge(e).bus_only) car_edges.push_back(e);
  }
  if (car_edges.size() < 2) throw ConfigError("random_trips needs at least two car edges");
  std::mt19937_64 rng(substream_seed(seed, "fixture-trips"));
  std::uniform_int_distribution<std::size_t> pick(0, car_edges.size() - 1);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> morning(8 * 3600.0, 3600.0), evening(17 * 3600.0, 3600.0);
  std::uniform_real_distribution<double> day(6 * 3600.0, 22 * 3600.0);
  demand::TripTable t;
  for (int i = 0; i < n; ++i) {
    const std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    while (b == a) b = pick(rng);
    const double mode = u01(rng);
    const double raw = mode < 0.4 ? morning(rng) : mode < 0.8 ? evening(rng) : day(rng);
    const double depart = std::clamp(std::floor(raw), 0.0, kDaySeconds - 1);
    t.trips.push_back({"r" + std::to_string(i), depart, net.edge(car_edges[a]).id, net.edge(car_edges[b]).id,
                       demand::Purpose::free_time});
  }
  std::sort(t.trips.begin(), t.trips.end(), [](const demand::Trip& x, const demand::Trip& y) {
    return std::tie(x.depart, x.id) < std::tie(y.depart, y.id);
  });
  return t;
}

demand::DemandInputs grid_statistics(const net::RoadNetwork& grid, std::uint64_t seed) {
  demand::DemandInputs in;
  const char* names[] = {"NW", "NE", "SW", "SE"};
  std::vector<std::vector<std::string>> edges(4);
  for (const auto& e : grid.edges()) {
    const auto j = grid.find_junction(e.from);
    if (grid.junctions()[*j].kind == net::JunctionKind::dead_end) continue;
    if (e.from.empty() || e.from[0] != 'J') continue;
    const auto to = grid.find_junction(e.to);
    if (grid.junctions()[*to].kind == net::JunctionKind::dead_end) continue;
    const int r = e.from[1] - '0';
    const int c = e.from[3] - '0';
    edges[(r >= 3 ? 2 : 0) + (c >= 3 ? 1 : 0)].push_back(e.id);
  }
  const std::array<long long, demand::kAgeBrackets> ages{90, 90, 120, 150, 90, 60, 150, 200, 400, 450, 450, 250, 500};
  const long long workers[] = {1100, 900, 1000, 1200};
  const long long positions[] = {600, 1900, 1400, 300};
  for (int d = 0; d < 4; ++d) {
    demand::DistrictStats s;
    s.id = names[d];
    s.edge_ids = edges[static_cast<std::size_t>(d)];
    s.inhabitants = 3000;
    s.households = 1400;
    s.workers = workers[d];
    s.work_positions = positions[d];
    s.unemployed = 250;
    s.vehicles = 1500;
    s.age_brackets = ages;
    in.districts.push_back(std::move(s));
  }
  in.gates = {{"GN", "GN-J0_2", "J0_2-GN", 0.25, 0.25},
              {"GS", "GS-J4_2", "J4_2-GS", 0.25, 0.25},
              {"GW", "GW-J2_0", "J2_0-GW", 0.25, 0.25},
              {"GE", "GE-J2_4", "J2_4-GE", 0.25, 0.25}};
  in.schools = {{"school", "J1_1-J1_2", 6, 10, 400, 8 * 3600.0, 13 * 3600.0},
                {"university", "J3_3-J3_2", 18, 25, 600, 9 * 3600.0, 16 * 3600.0}};
  in.config.incoming_total = 900;
  in.config.outgoing_total = 400;
  in.config.seed = seed;
  return in;
}

std::vector<sim::Detector> grid_detectors(const net::RoadNetwork& grid) {
  std::vector<sim::Detector> out;
  auto add = [&](EdgeIdx e) {
    char id[8];
    std::snprintf(id, sizeof id, "D%02zu", out.size() + 1);
    const auto& edge = grid.edge(e);
    out.push_back({id, edge.id, -1, std::max(0.0, edge.length - 30.0), kWindowSeconds});
  };
  for (const char* j : {"J1_1", "J1_3", "J2_2", "J3_1", "J3_3"}) {
    const auto idx = grid.find_junction(j);
    if (!idx) continue;
    for (EdgeIdx e : grid.incoming(*idx)) add(e);
  }
  for (const char* g : {"GE-J2_4", "GN-J0_2", "GS-J4_2", "GW-J2_0"}) {
    if (const auto e = grid.find_edge(g)) add(*e);
  }
  return out;
}

std::vector<sim::BusLine> grid_bus_lines(const net::RoadNetwork& grid) {
  sim::BusLine line;
  line.id = "bus1";
  for (int c = 0; c + 1 < 5; ++c) line.route.push_back(eid(jid(2, c), jid(2, c + 1)));
  for (const auto& r : line.route) {
    if (!grid.find_edge(r)) return {};
  }
  line.stop_sequence = {"BS_west", "BS_centre"};
  for (double t = 6 * 3600.0; t <= 20 * 3600.0; t += 900.0) line.departures.push_back(t);
  return {line};
}

std::vector<dataio::Date> month_days(int year, unsigned month) {
  using namespace std::chrono;
  std::vector<dataio::Date> days;
  const year_month ym{std::chrono::year{year}, std::chrono::month{month}};
  const auto last = year_month_day_last{ym.year(), month_day_last{ym.month()}}.day();
  for (unsigned d = 1; d <= static_cast<unsigned>(last); ++d) days.push_back(ym / std::chrono::day{d});
  return days;
}

std::vector<dataio::RawMeasurement> synthesize_measurements(const std::vector<DetectorSeries>& truth,
                                                            const std::vector<dataio::Date>& days,
                                                            const dataio::IngestionFilter& filter,
                                                            std::optional<dataio::Date> faulty_day,
                                                            double noise, std::uint64_t seed) {
  std::mt19937_64 rng(substream_seed(seed, "measurements"));
  std::uniform_real_distribution<double> distort(1.3, 1.8);
  std::vector<dataio::RawMeasurement> out;
  for (std::size_t d = 0; d < truth.size(); ++d) {
    const auto& s = truth[d];
    std::vector<dataio::Date> kept;
    for (const auto& day : days) {
      const bool faulty = d == 0 && faulty_day && *faulty_day == day;
      if (dataio::day_allowed(filter, day) && !faulty) kept.push_back(day);
    }
    for (const auto& day : days) {
      const auto pos = std::find(kept.begin(), kept.end(), day);
      double factor;
      if (pos != kept.end()) {
        const auto k = static_cast<std::size_t>(pos - kept.begin());
        // Pairs of +noise / -noise; an odd last day carries the truth as is.
        factor = (k + 1 == kept.size() && kept.size() % 2 == 1) ? 1.0 : (k % 2 == 0 ? 1.0 + noise : 1.0 - noise);
      } else {
        factor = distort(rng);
      }
      const bool faulty = d == 0 && faulty_day && *faulty_day == day;
      for (std::size_t w = 0; w < s.counts.size(); ++w) {
        if (faulty && w == 40) continue;
        out.push_back({s.detector_id, day, static_cast<int>(w) * 900, s.counts[w] * factor});
      }
    }
  }
  return out;
}

}  // namespace tcal::fixtures
