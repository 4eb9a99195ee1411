#include <algorithm>
#include <filesystem>

#include "common/strict_json.hpp"
#include "tcal/microsim.hpp"

namespace tcal::sim {

using detail::json;
using detail::StrictObject;

namespace {

std::vector<std::string> string_list(StrictObject& o, const char* key) {
  std::vector<std::string> out;
  for (const auto& v : o.array(key)) {
    if (!v.is_string()) o.fail(key, "expected strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

std::string routes_to_json(const net::RoadNetwork& net, const std::vector<demand::VehicleRoute>& routes) {
  json arr = json::array();
  for (const auto& r : routes) {
    arr.push_back({{"trip_id", r.trip_id},
                   {"edges", net::edge_ids(net, r.edges)},
                   {"depart", r.depart},
                   {"equipped", r.equipped}});
  }
  return json{{"routes", std::move(arr)}}.dump(1) + "\n";
}

std::vector<demand::VehicleRoute> parse_routes(std::string_view json_text, const net::RoadNetwork& net,
                                               std::string_view source) {
  const json doc = detail::parse_document(json_text, source);
  StrictObject root(doc, "", source);
  const json& arr = root.array("routes");
  root.finish();
  std::vector<demand::VehicleRoute> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    StrictObject o(arr[i], root.child_path("routes", i), source);
    demand::VehicleRoute r;
    r.trip_id = o.string("trip_id");
    for (const auto& id : string_list(o, "edges")) r.edges.push_back(net.edge_index(id));
    r.depart = o.number("depart");
    r.equipped = o.boolean_or("equipped", false);
    o.finish();
    if (r.edges.empty()) o.fail("edges", "must not be empty");
    if (!(r.depart >= 0)) o.fail("depart", "must be >= 0");
    out.push_back(std::move(r));
  }
  return out;
}

void write_routes(const net::RoadNetwork& net, const std::vector<demand::VehicleRoute>& routes,
                  const std::filesystem::path& path) {
  detail::write_text_file(path.string(), routes_to_json(net, routes));
}

std::vector<demand::VehicleRoute> read_routes(const std::filesystem::path& path, const net::RoadNetwork& net) {
  return parse_routes(detail::read_text_file(path.string()), net, path.string());
}

std::string detectors_to_json(const std::vector<Detector>& detectors) {
  json arr = json::array();
  for (const auto& d : detectors) {
    arr.push_back({{"id", d.id}, {"edge_id", d.edge_id}, {"lane", d.lane}, {"position", d.position}, {"window", d.window}});
  }
  return json{{"detectors", std::move(arr)}}.dump(1) + "\n";
}

std::vector<Detector> parse_detectors(std::string_view json_text, std::string_view source) {
  const json doc = detail::parse_document(json_text, source);
  StrictObject root(doc, "", source);
  const json& arr = root.array("detectors");
  root.finish();
  std::vector<Detector> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    StrictObject o(arr[i], root.child_path("detectors", i), source);
    Detector d;
    d.id = o.string("id");
    d.edge_id = o.string("edge_id");
    d.lane = static_cast<int>(o.integer_or("lane", -1));
    d.position = o.number("position");
    d.window = o.number_or("window", kWindowSeconds);
    o.finish();
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<Detector> read_detectors(const std::filesystem::path& path) {
  return parse_detectors(detail::read_text_file(path.string()), path.string());
}

void write_detectors(const std::vector<Detector>& detectors, const std::filesystem::path& path) {
  detail::write_text_file(path.string(), detectors_to_json(detectors));
}

std::string bus_lines_to_json(const std::vector<BusLine>& lines) {
  json arr = json::array();
  for (const auto& l : lines) {
    arr.push_back({{"id", l.id},
                   {"stop_sequence", l.stop_sequence},
                   {"route", l.route},
                   {"departures", l.departures},
                   {"dwell", l.dwell}});
  }
  return json{{"bus_lines", std::move(arr)}}.dump(1) + "\n";
}

std::vector<BusLine> parse_bus_lines(std::string_view json_text, std::string_view source) {
  const json doc = detail::parse_document(json_text, source);
  StrictObject root(doc, "", source);
  const json& arr = root.array("bus_lines");
  root.finish();
  std::vector<BusLine> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    StrictObject o(arr[i], root.child_path("bus_lines", i), source);
    BusLine l;
    l.id = o.string("id");
    l.stop_sequence = string_list(o, "stop_sequence");
    l.route = string_list(o, "route");
    for (const auto& v : o.array("departures")) {
      if (!v.is_number()) o.fail("departures", "expected numbers");
      l.departures.push_back(v.get<double>());
    }
    l.dwell = o.number_or("dwell", 10.0);
    o.finish();
    out.push_back(std::move(l));
  }
  return out;
}

std::vector<BusLine> read_bus_lines(const std::filesystem::path& path) {
  return parse_bus_lines(detail::read_text_file(path.string()), path.string());
}

std::vector<DetectorSeries> series_of(const SimOutput& out) {
  std::vector<DetectorSeries> series;
  series.reserve(out.detector_series.size());
  for (const auto& [id, s] : out.detector_series) series.push_back(s);
  return series;
}

std::string running_to_csv(const SimOutput& out) {
  std::string text = "minute,count\n";
  for (std::size_t m = 0; m < out.running_count.size(); ++m) {
    text += std::to_string(m) + "," + std::to_string(out.running_count[m]) + "\n";
  }
  return text;
}

std::string vehicles_to_csv(const SimOutput& out) {
  std::string text = "id,kind,arrived,depart,travel_time,time_loss,teleports\n";
  for (const auto& v : out.vehicles) {
    text += v.id + "," + std::string(to_string(v.kind)) + "," + (v.arrived ? "1" : "0") + "," +
            format_number(v.depart) + "," + format_number(v.travel_time) + "," + format_number(v.time_loss) + "," +
            std::to_string(v.teleport_count) + "\n";
  }
  return text;
}

void write_outputs(const SimOutput& out, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_series_csv(series_of(out), dir / "detectors.csv");
  detail::write_text_file((dir / "running.csv").string(), running_to_csv(out));
  detail::write_text_file((dir / "vehicles.csv").string(), vehicles_to_csv(out));
}

}  // namespace tcal::sim
