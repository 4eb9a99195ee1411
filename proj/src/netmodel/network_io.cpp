#include <array>

#include "common/strict_json.hpp"
#include "tcal/netmodel.hpp"

namespace tcal::net {

using detail::json;
using detail::StrictObject;

namespace {

template <typename Enum, std::size_t N>
Enum enum_field(StrictObject& obj, const char* key, const std::array<Enum, N>& values) {
  const std::string text = obj.string(key);
  for (Enum v : values) {
    if (to_string(v) == text) return v;
  }
  obj.fail(key, "unknown value '" + text + "'");
}

constexpr std::array kJunctionKinds{JunctionKind::plain, JunctionKind::traffic_light, JunctionKind::dead_end};
constexpr std::array kCategories{RoadCategory::normal, RoadCategory::tunnel, RoadCategory::under_building,
                                 RoadCategory::under_bridge};
constexpr std::array kLogics{TlsLogic::fixed, TlsLogic::actuated};

template <typename Fn>
void for_each_element(StrictObject& root, const char* key, Fn&& fn) {
  const json& arr = root.array(key);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    StrictObject obj(arr[i], root.child_path(key, i), root.source());
    fn(obj);
    obj.finish();
  }
}

int checked_int(StrictObject& obj, const char* key) {
  const long long v = obj.integer(key);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) obj.fail(key, "out of range");
  return static_cast<int>(v);
}

}  // namespace

RoadNetwork parse_network(std::string_view json_text, std::string_view source) {
  const json doc = detail::parse_document(json_text, source);
  StrictObject root(doc, "", source);
  NetworkParts parts;

  for_each_element(root, "junctions", [&](StrictObject& o) {
    Junction j;
    j.id = o.string("id");
    j.x = o.number("x");
    j.y = o.number("y");
    j.kind = enum_field(o, "kind", kJunctionKinds);
    parts.junctions.push_back(std::move(j));
  });
  for_each_element(root, "edges", [&](StrictObject& o) {
    Edge e;
    e.id = o.string("id");
    e.from = o.string("from");
    e.to = o.string("to");
    e.length = o.number("length");
    e.lane_count = checked_int(o, "lane_count");
    e.speed_limit = o.number("speed_limit");
    e.category = enum_field(o, "category", kCategories);
    e.bus_only = o.boolean("bus_only");
    parts.edges.push_back(std::move(e));
  });
  for_each_element(root, "tls", [&](StrictObject& o) {
    TlsProgram t;
    t.junction_id = o.string("junction_id");
    t.logic = enum_field(o, "logic", kLogics);
    const json& phases = o.array("phases");
    for (std::size_t i = 0; i < phases.size(); ++i) {
      StrictObject po(phases[i], o.child_path("phases", i), source);
      TlsPhase ph;
      ph.duration = po.number("duration");
      ph.min_duration = po.number("min_duration");
      ph.max_duration = po.number("max_duration");
      ph.state = po.string("state");
      po.finish();
      t.phases.push_back(std::move(ph));
    }
    parts.tls.push_back(std::move(t));
  });
  for_each_element(root, "bus_stops", [&](StrictObject& o) {
    BusStop s;
    s.id = o.string("id");
    s.edge_id = o.string("edge_id");
    s.position = o.number("position");
    s.name = o.string("name");
    parts.bus_stops.push_back(std::move(s));
  });
  for_each_element(root, "parking", [&](StrictObject& o) {
    ParkingArea p;
    p.id = o.string("id");
    p.edge_id = o.string("edge_id");
    p.capacity = checked_int(o, "capacity");
    p.initial_occupancy = checked_int(o, "initial_occupancy");
    parts.parking.push_back(std::move(p));
  });
  for_each_element(root, "buildings", [&](StrictObject& o) {
    BuildingPoly b;
    b.id = o.string("id");
    const json& verts = o.array("vertices");
    for (std::size_t i = 0; i < verts.size(); ++i) {
      const json& v = verts[i];
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        o.fail("vertices[" + std::to_string(i) + "]", "expected [x, y]");
      }
      b.vertices.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    parts.buildings.push_back(std::move(b));
  });
  root.finish();
  return RoadNetwork::build(std::move(parts));
}

RoadNetwork load_network(const std::filesystem::path& path) {
  return parse_network(detail::read_text_file(path.string()), path.string());
}

std::string network_to_json(const RoadNetwork& net) {
  json doc;
  json& junctions = doc["junctions"] = json::array();
  for (const auto& j : net.junctions()) {
    junctions.push_back({{"id", j.id}, {"x", j.x}, {"y", j.y}, {"kind", to_string(j.kind)}});
  }
  json& edges = doc["edges"] = json::array();
  for (const auto& e : net.edges()) {
    edges.push_back({{"id", e.id},
                     {"from", e.from},
                     {"to", e.to},
                     {"length", e.length},
                     {"lane_count", e.lane_count},
                     {"speed_limit", e.speed_limit},
                     {"category", to_string(e.category)},
                     {"bus_only", e.bus_only}});
  }
  json& tls = doc["tls"] = json::array();
  for (const auto& t : net.tls_programs()) {
    json phases = json::array();
    for (const auto& p : t.phases) {
      phases.push_back({{"duration", p.duration},
                        {"min_duration", p.min_duration},
                        {"max_duration", p.max_duration},
                        {"state", p.state}});
    }
    tls.push_back({{"junction_id", t.junction_id}, {"logic", to_string(t.logic)}, {"phases", phases}});
  }
  json& stops = doc["bus_stops"] = json::array();
  for (const auto& s : net.bus_stops()) {
    stops.push_back({{"id", s.id}, {"edge_id", s.edge_id}, {"position", s.position}, {"name", s.name}});
  }
  json& parking = doc["parking"] = json::array();
  for (const auto& p : net.parking_areas()) {
    parking.push_back({{"id", p.id},
                       {"edge_id", p.edge_id},
                       {"capacity", p.capacity},
                       {"initial_occupancy", p.initial_occupancy}});
  }
  json& buildings = doc["buildings"] = json::array();
  for (const auto& b : net.buildings()) {
    json verts = json::array();
    for (const auto& v : b.vertices) verts.push_back({v.x, v.y});
    buildings.push_back({{"id", b.id}, {"vertices", verts}});
  }
  return doc.dump(1) + "\n";
}

void save_network(const RoadNetwork& net, const std::filesystem::path& path) {
  detail::write_text_file(path.string(), network_to_json(net));
}

}  // namespace tcal::net
