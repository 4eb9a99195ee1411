#include <algorithm>

#include "common/strict_json.hpp"
#include "tcal/cli.hpp"

namespace tcal::cli {

using detail::json;
using detail::StrictObject;

namespace {

constexpr const char* kWeekdayNames[] = {"Sun", "Mon", "Tue", "Wed", "Thu", "Fri", "Sat"};
constexpr const char* kDemandKeys[] = {"car_rate",       "car_preference_rate", "incoming_total",
                                       "outgoing_total", "departure_jitter_sd", "free_time_rate"};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::string relative_to(const std::filesystem::path& p, const std::filesystem::path& base) {
  if (p.empty()) return "";
  const auto rel = p.lexically_relative(base);
  if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  return p.generic_string();
}

sim::CarFollowParams parse_params(StrictObject& parent, const char* key, sim::CarFollowParams p) {
  if (!parent.has(key)) return p;
  StrictObject o(parent.raw(key), parent.child_path(key), parent.source());
  p.accel = o.number_or("accel", p.accel);
  p.decel = o.number_or("decel", p.decel);
  p.v_max = o.number_or("v_max", p.v_max);
  p.tau = o.number_or("tau", p.tau);
  p.sigma = o.number_or("sigma", p.sigma);
  p.min_gap = o.number_or("min_gap", p.min_gap);
  p.veh_length = o.number_or("veh_length", p.veh_length);
  o.finish();
  return p;
}

json params_json(const sim::CarFollowParams& p) {
  return {{"accel", p.accel}, {"decel", p.decel},     {"v_max", p.v_max},          {"tau", p.tau},
          {"sigma", p.sigma}, {"min_gap", p.min_gap}, {"veh_length", p.veh_length}};
}

std::optional<dataio::Date> optional_date(StrictObject& o, const char* key) {
  if (!o.has(key)) return std::nullopt;
  try {
    return dataio::parse_date(o.string(key));
  } catch (const ParseError& e) {
    o.fail(key, e.what());
  }
}

}  // namespace

ProjectConfig parse_project_config(std::string_view json_text, const std::filesystem::path& base_dir,
                                   std::string_view source) {
  const json doc = detail::parse_document(json_text, source);
  StrictObject root(doc, "", source);
  ProjectConfig c;
  c.seed = static_cast<std::uint64_t>(root.integer_or("seed", 0));

  if (root.has("paths")) {
    StrictObject p(root.raw("paths"), "paths", source);
    c.paths.network = resolve(base_dir, p.string_or("network", ""));
    c.paths.statistics = resolve(base_dir, p.string_or("statistics", ""));
    c.paths.trips = resolve(base_dir, p.string_or("trips", ""));
    c.paths.routes = resolve(base_dir, p.string_or("routes", ""));
    c.paths.detectors = resolve(base_dir, p.string_or("detectors", ""));
    c.paths.bus_lines = resolve(base_dir, p.string_or("bus_lines", ""));
    c.paths.measurements = resolve(base_dir, p.string_or("measurements", ""));
    c.paths.output_dir = resolve(base_dir, p.string_or("output_dir", "."));
    p.finish();
  } else {
    c.paths.output_dir = base_dir;
  }

  if (root.has("sim")) {
    StrictObject s(root.raw("sim"), "sim", source);
    auto& sc = c.sim;
    sc.begin = s.number_or("begin", sc.begin);
    sc.end = s.number_or("end", sc.end);
    sc.step_length = s.number_or("step_length", sc.step_length);
    sc.ignore_junction_blocker = s.number_or("ignore_junction_blocker", sc.ignore_junction_blocker);
    sc.time_to_teleport = s.number_or("time_to_teleport", sc.time_to_teleport);
    sc.rerouting_probability = s.number_or("rerouting_probability", sc.rerouting_probability);
    sc.rerouting_period = s.number_or("rerouting_period", sc.rerouting_period);
    sc.actuation_max_gap = s.number_or("actuation_max_gap", sc.actuation_max_gap);
    sc.actuation_zone = s.number_or("actuation_zone", sc.actuation_zone);
    sc.speed_smoothing = s.number_or("speed_smoothing", sc.speed_smoothing);
    sc.edge_cost_interval = s.number_or("edge_cost_interval", sc.edge_cost_interval);
    sc.car = parse_params(s, "car", sc.car);
    sc.bus = parse_params(s, "bus", sc.bus);
    s.finish();
  }

  if (root.has("demand")) {
    StrictObject d(root.raw("demand"), "demand", source);
    for (const char* key : kDemandKeys) {
      if (d.has(key)) c.demand_overrides[key] = d.number(key);
    }
    d.finish();
  }

  if (root.has("equilibrium")) {
    StrictObject e(root.raw("equilibrium"), "equilibrium", source);
    auto& q = c.equilibrium;
    q.max_iter = static_cast<int>(e.integer_or("max_iter", q.max_iter));
    q.tol = e.number_or("tol", q.tol);
    q.window = static_cast<int>(e.integer_or("window", q.window));
    q.beta = e.number_or("beta", q.beta);
    q.alpha = e.number_or("alpha", q.alpha);
    q.max_alternatives = static_cast<std::size_t>(e.integer_or("max_alternatives", static_cast<long long>(q.max_alternatives)));
    q.cost_smoothing = e.number_or("cost_smoothing", q.cost_smoothing);
    e.finish();
  }

  if (root.has("sweep")) {
    StrictObject s(root.raw("sweep"), "sweep", source);
    c.sweep.grid.p_min = s.number_or("p_min", c.sweep.grid.p_min);
    c.sweep.grid.p_max = s.number_or("p_max", c.sweep.grid.p_max);
    c.sweep.grid.step = s.number_or("step", c.sweep.grid.step);
    const long long workers = s.integer_or("workers", c.sweep.workers);
    if (workers < 1) s.fail("workers", "must be >= 1");
    c.sweep.workers = static_cast<unsigned>(workers);
    s.finish();
  }

  if (root.has("ingest")) {
    StrictObject g(root.raw("ingest"), "ingest", source);
    auto& f = c.ingest.filter;
    if (g.has("include_weekdays")) {
      f.include_weekdays.fill(false);
      for (const auto& v : g.array("include_weekdays")) {
        const auto* name = v.is_string() ? v.get_ptr<const std::string*>() : nullptr;
        const auto* hit = name ? std::find(std::begin(kWeekdayNames), std::end(kWeekdayNames), *name) : std::end(kWeekdayNames);
        if (hit == std::end(kWeekdayNames)) g.fail("include_weekdays", "expected weekday names Sun..Sat");
        f.include_weekdays[static_cast<std::size_t>(hit - std::begin(kWeekdayNames))] = true;
      }
    }
    if (g.has("exclude_dates")) {
      for (const auto& v : g.array("exclude_dates")) {
        if (!v.is_string()) g.fail("exclude_dates", "expected date strings");
        try {
          f.exclude_dates.push_back(dataio::parse_date(v.get<std::string>()));
        } catch (const ParseError& e) {
          g.fail("exclude_dates", e.what());
        }
      }
    }
    f.first_day = optional_date(g, "first_day");
    f.last_day = optional_date(g, "last_day");
    c.ingest.modeling_month = g.string_or("modeling_month", c.ingest.modeling_month);
    c.ingest.validation_month = g.string_or("validation_month", c.ingest.validation_month);
    g.finish();
  }
  root.finish();
  return c;
}

ProjectConfig load_project_config(const std::filesystem::path& path) {
  return parse_project_config(detail::read_text_file(path.string()), path.parent_path(), path.string());
}

std::string project_config_to_json(const ProjectConfig& c, const std::filesystem::path& base) {
  json paths{{"network", relative_to(c.paths.network, base)},
             {"statistics", relative_to(c.paths.statistics, base)},
             {"trips", relative_to(c.paths.trips, base)},
             {"routes", relative_to(c.paths.routes, base)},
             {"detectors", relative_to(c.paths.detectors, base)},
             {"bus_lines", relative_to(c.paths.bus_lines, base)},
             {"measurements", relative_to(c.paths.measurements, base)},
             {"output_dir", c.paths.output_dir == base ? std::string(".") : relative_to(c.paths.output_dir, base)}};
  const auto& s = c.sim;
  json sim{{"begin", s.begin},
           {"end", s.end},
           {"step_length", s.step_length},
           {"ignore_junction_blocker", s.ignore_junction_blocker},
           {"time_to_teleport", s.time_to_teleport},
           {"rerouting_probability", s.rerouting_probability},
           {"rerouting_period", s.rerouting_period},
           {"actuation_max_gap", s.actuation_max_gap},
           {"actuation_zone", s.actuation_zone},
           {"speed_smoothing", s.speed_smoothing},
           {"edge_cost_interval", s.edge_cost_interval},
           {"car", params_json(s.car)},
           {"bus", params_json(s.bus)}};
  json demand = json::object();
  for (const auto& [k, v] : c.demand_overrides) demand[k] = v;
  const auto& q = c.equilibrium;
  json eq{{"max_iter", q.max_iter}, {"tol", q.tol},     {"window", q.window},
          {"beta", q.beta},         {"alpha", q.alpha}, {"max_alternatives", q.max_alternatives},
          {"cost_smoothing", q.cost_smoothing}};
  json sweep{{"p_min", c.sweep.grid.p_min},
             {"p_max", c.sweep.grid.p_max},
             {"step", c.sweep.grid.step},
             {"workers", c.sweep.workers}};
  json weekdays = json::array();
  for (std::size_t i = 0; i < 7; ++i) {
    if (c.ingest.filter.include_weekdays[i]) weekdays.push_back(kWeekdayNames[i]);
  }
  json excluded = json::array();
  for (const auto& d : c.ingest.filter.exclude_dates) excluded.push_back(dataio::format_date(d));
  json ingest{{"include_weekdays", weekdays},
              {"exclude_dates", excluded},
              {"modeling_month", c.ingest.modeling_month},
              {"validation_month", c.ingest.validation_month}};
  if (c.ingest.filter.first_day) ingest["first_day"] = dataio::format_date(*c.ingest.filter.first_day);
  if (c.ingest.filter.last_day) ingest["last_day"] = dataio::format_date(*c.ingest.filter.last_day);
  json doc{{"seed", c.seed}, {"paths", paths},   {"sim", sim},       {"demand", demand},
           {"equilibrium", eq}, {"sweep", sweep}, {"ingest", ingest}};
  return doc.dump(1) + "\n";
}

void save_project_config(const ProjectConfig& config, const std::filesystem::path& path) {
  detail::write_text_file(path.string(), project_config_to_json(config, path.parent_path()));
}

void apply_demand_overrides(const ProjectConfig& c, demand::DemandConfig& d) {
  for (const auto& [key, v] : c.demand_overrides) {
    if (key == "car_rate") d.car_rate = v;
    else if (key == "car_preference_rate") d.car_preference_rate = v;
    else if (key == "incoming_total") d.incoming_total = static_cast<long long>(v);
    else if (key == "outgoing_total") d.outgoing_total = static_cast<long long>(v);
    else if (key == "departure_jitter_sd") d.departure_jitter_sd = v;
    else if (key == "free_time_rate") d.free_time_rate = v;
  }
  d.seed = c.seed;
}

}  // namespace tcal::cli
