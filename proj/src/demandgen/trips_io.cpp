#include <algorithm>
#include <array>

#include "common/strict_json.hpp"
#include "tcal/demandgen.hpp"

namespace tcal::demand {

using detail::json;
using detail::StrictObject;

namespace {

constexpr std::array kPurposes{Purpose::work,     Purpose::school_dropoff, Purpose::university,
                               Purpose::incoming, Purpose::outgoing,       Purpose::free_time};

Purpose purpose_field(StrictObject& o) {
  const std::string text = o.string("purpose");
  for (Purpose p : kPurposes) {
    if (to_string(p) == text) return p;
  }
  o.fail("purpose", "unknown purpose '" + text + "'");
}

std::vector<Trip> sorted_trips(const TripTable& trips) {
  std::vector<Trip> sorted = trips.trips;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Trip& a, const Trip& b) { return std::tie(a.depart, a.id) < std::tie(b.depart, b.id); });
  return sorted;
}

}  // namespace

std::string trips_to_json(const TripTable& trips) {
  json arr = json::array();
  for (const auto& t : sorted_trips(trips)) {
    arr.push_back({{"id", t.id},
                   {"depart", t.depart},
                   {"from_edge", t.from_edge},
                   {"to_edge", t.to_edge},
                   {"purpose", to_string(t.purpose)}});
  }
  json doc{{"trips", std::move(arr)}};
  return doc.dump(1) + "\n";
}

TripTable parse_trips(std::string_view json_text, std::string_view source) {
  const json doc = detail::parse_document(json_text, source);
  StrictObject root(doc, "", source);
  const json& arr = root.array("trips");
  root.finish();
  TripTable table;
  table.trips.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    StrictObject o(arr[i], "trips[" + std::to_string(i) + "]", source);
    Trip t;
    t.id = o.string("id");
    t.depart = o.number("depart");
    t.from_edge = o.string("from_edge");
    t.to_edge = o.string("to_edge");
    t.purpose = purpose_field(o);
    o.finish();
    if (!(t.depart >= 0.0 && t.depart < kDaySeconds)) o.fail("depart", "must lie in [0, 86400)");
    table.trips.push_back(std::move(t));
  }
  return table;
}

void write_trips(const TripTable& trips, const std::filesystem::path& path) {
  detail::write_text_file(path.string(), trips_to_json(trips));
}

TripTable read_trips(const std::filesystem::path& path) {
  return parse_trips(detail::read_text_file(path.string()), path.string());
}

// --- statistics file ---------------------------------------------------------

std::string statistics_to_json(const DemandInputs& in) {
  json districts = json::array();
  for (const auto& d : in.districts) {
    districts.push_back({{"id", d.id},
                         {"edge_ids", d.edge_ids},
                         {"inhabitants", d.inhabitants},
                         {"households", d.households},
                         {"workers", d.workers},
                         {"work_positions", d.work_positions},
                         {"unemployed", d.unemployed},
                         {"vehicles", d.vehicles},
                         {"age_brackets", d.age_brackets}});
  }
  json gates = json::array();
  for (const auto& g : in.gates) {
    gates.push_back({{"id", g.id},
                     {"in_edge", g.in_edge},
                     {"out_edge", g.out_edge},
                     {"incoming_share", g.incoming_share},
                     {"outgoing_share", g.outgoing_share}});
  }
  json schools = json::array();
  for (const auto& s : in.schools) {
    schools.push_back({{"id", s.id},
                       {"edge_id", s.edge_id},
                       {"age_min", s.age_min},
                       {"age_max", s.age_max},
                       {"capacity", s.capacity},
                       {"opening_h", s.opening_h},
                       {"closing_h", s.closing_h}});
  }
  json hours = json::array();
  for (const auto& w : in.config.work_hours) {
    hours.push_back({{"opening_h", w.opening_h}, {"closing_h", w.closing_h}, {"worker_share", w.worker_share}});
  }
  const auto& c = in.config;
  json config{{"car_rate", c.car_rate},
              {"car_preference_rate", c.car_preference_rate},
              {"incoming_total", c.incoming_total},
              {"outgoing_total", c.outgoing_total},
              {"work_hours", hours},
              {"departure_jitter_sd", c.departure_jitter_sd},
              {"free_time_rate", c.free_time_rate},
              {"seed", c.seed}};
  json doc{{"districts", districts}, {"gates", gates}, {"schools", schools}, {"config", config}};
  return doc.dump(1) + "\n";
}

DemandInputs parse_statistics(std::string_view json_text, std::string_view source) {
  const json doc = detail::parse_document(json_text, source);
  StrictObject root(doc, "", source);
  DemandInputs in;

  const json& districts = root.array("districts");
  for (std::size_t i = 0; i < districts.size(); ++i) {
    StrictObject o(districts[i], root.child_path("districts", i), source);
    DistrictStats d;
    d.id = o.string("id");
    for (const auto& e : o.array("edge_ids")) {
      if (!e.is_string()) o.fail("edge_ids", "expected strings");
      d.edge_ids.push_back(e.get<std::string>());
    }
    d.inhabitants = o.integer("inhabitants");
    d.households = o.integer("households");
    d.workers = o.integer("workers");
    d.work_positions = o.integer("work_positions");
    d.unemployed = o.integer("unemployed");
    d.vehicles = o.integer("vehicles");
    const json& brackets = o.array("age_brackets");
    if (brackets.size() != kAgeBrackets) o.fail("age_brackets", "expected 13 counts");
    for (std::size_t b = 0; b < kAgeBrackets; ++b) {
      if (!brackets[b].is_number_integer()) o.fail("age_brackets", "expected integers");
      d.age_brackets[b] = brackets[b].get<long long>();
    }
    o.finish();
    in.districts.push_back(std::move(d));
  }

  const json& gates = root.array("gates");
  for (std::size_t i = 0; i < gates.size(); ++i) {
    StrictObject o(gates[i], root.child_path("gates", i), source);
    CityGate g;
    g.id = o.string("id");
    g.in_edge = o.string("in_edge");
    g.out_edge = o.string("out_edge");
    g.incoming_share = o.number("incoming_share");
    g.outgoing_share = o.number("outgoing_share");
    o.finish();
    in.gates.push_back(std::move(g));
  }

  const json& schools = root.array("schools");
  for (std::size_t i = 0; i < schools.size(); ++i) {
    StrictObject o(schools[i], root.child_path("schools", i), source);
    School s;
    s.id = o.string("id");
    s.edge_id = o.string("edge_id");
    s.age_min = static_cast<int>(o.integer("age_min"));
    s.age_max = static_cast<int>(o.integer("age_max"));
    s.capacity = o.integer("capacity");
    s.opening_h = o.number("opening_h");
    s.closing_h = o.number("closing_h");
    o.finish();
    in.schools.push_back(std::move(s));
  }

  StrictObject c(root.raw("config"), "config", source);
  in.config.car_rate = c.number_or("car_rate", in.config.car_rate);
  in.config.car_preference_rate = c.number_or("car_preference_rate", in.config.car_preference_rate);
  in.config.incoming_total = c.integer_or("incoming_total", 0);
  in.config.outgoing_total = c.integer_or("outgoing_total", 0);
  if (c.has("work_hours")) {
    in.config.work_hours.clear();
    const json& hours = c.array("work_hours");
    for (std::size_t i = 0; i < hours.size(); ++i) {
      StrictObject w(hours[i], c.child_path("work_hours", i), source);
      in.config.work_hours.push_back({w.number("opening_h"), w.number("closing_h"), w.number("worker_share")});
      w.finish();
    }
  }
  in.config.departure_jitter_sd = c.number_or("departure_jitter_sd", in.config.departure_jitter_sd);
  in.config.free_time_rate = c.number_or("free_time_rate", in.config.free_time_rate);
  in.config.seed = static_cast<std::uint64_t>(c.integer_or("seed", 0));
  c.finish();
  root.finish();
  return in;
}

DemandInputs load_statistics(const std::filesystem::path& path) {
  return parse_statistics(detail::read_text_file(path.string()), path.string());
}

void save_statistics(const DemandInputs& inputs, const std::filesystem::path& path) {
  detail::write_text_file(path.string(), statistics_to_json(inputs));
}

}  // namespace tcal::demand
