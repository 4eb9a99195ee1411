#include <functional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "common/strict_json.hpp"
#include "tcal/cli.hpp"
#include "tcal/fixtures.hpp"

namespace tcal::cli {

namespace fs = std::filesystem;
using detail::json;

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::string output_dir;
  std::string network, statistics, trips, routes, detectors, bus_lines, measurements, sweep;
  std::optional<double> p, p_min, p_max, step;
};

class Context {
 public:
  Context(ProjectConfig cfg, std::ostream& out, std::ostream& err) : cfg(std::move(cfg)), out_(out), err_(err) {}

  void log(const std::string& msg) const { out_ << "[seed=" << cfg.seed << "] " << msg << '\n'; }
  void warn(const std::string& msg) const { err_ << "[seed=" << cfg.seed << "] warning: " << msg << '\n'; }

  fs::path output_dir() const {
    fs::create_directories(cfg.paths.output_dir);
    return cfg.paths.output_dir;
  }
  fs::path output(const char* name) const { return output_dir() / name; }

  // Configured path, else the file of that name in output_dir.
  std::optional<fs::path> find(const fs::path& configured, const char* name) const {
    if (!configured.empty()) {
      if (!fs::exists(configured)) throw UsageError("no such file: " + configured.string());
      return configured;
    }
    const fs::path fallback = cfg.paths.output_dir / name;
    if (fs::exists(fallback)) return fallback;
    return std::nullopt;
  }

  fs::path require(const fs::path& configured, const char* name, const char* flag) const {
    auto p = find(configured, name);
    if (!p) throw UsageError(std::string("missing input: pass ") + flag + " or put " + name + " in the output directory");
    return *p;
  }

  ProjectConfig cfg;

 private:
  std::ostream& out_;
  std::ostream& err_;
};

sim::SimConfig sim_config(const ProjectConfig& c) {
  sim::SimConfig s = c.sim;
  s.seed = c.seed;
  return s;
}

eq::DuaConfig dua_config(const ProjectConfig& c) {
  eq::DuaConfig d = c.equilibrium;
  d.seed = c.seed;
  d.sim = sim_config(c);
  return d;
}

std::vector<demand::VehicleRoute> load_routes(const Context& ctx, const net::RoadNetwork& net) {
  if (auto path = ctx.find(ctx.cfg.paths.routes, "routes.json")) return sim::read_routes(*path, net);
  const auto trips = demand::read_trips(ctx.require(ctx.cfg.paths.trips, "trips.json", "--routes or --trips"));
  auto expanded = demand::expand_routes(trips, net);
  demand::require_all_routed(expanded);
  ctx.log("no route file; using free-flow routes for " + std::to_string(expanded.routes.size()) + " trips");
  return std::move(expanded.routes);
}

std::vector<sim::BusLine> load_bus_lines(const Context& ctx) {
  auto path = ctx.find(ctx.cfg.paths.bus_lines, "bus_lines.json");
  return path ? sim::read_bus_lines(*path) : std::vector<sim::BusLine>{};
}

std::vector<sim::Detector> load_detectors(const Context& ctx) {
  auto path = ctx.find(ctx.cfg.paths.detectors, "detectors.json");
  return path ? sim::read_detectors(*path) : std::vector<sim::Detector>{};
}

dataio::DatasetSplit load_split(const Context& ctx) {
  const auto records = dataio::read_measurements(
      ctx.require(ctx.cfg.paths.measurements, "measurements.csv", "--measurements"));
  return dataio::split_dataset(records, ctx.cfg.ingest.modeling_month, ctx.cfg.ingest.validation_month);
}

std::string fmt(double v) { return format_number(v); }

// --- subcommands ------------------------------------------------------------

int net_validate(Context& ctx) {
  const auto net = net::load_network(ctx.require(ctx.cfg.paths.network, "network.json", "--network"));
  const auto violations = net::validate_network(net);
  json doc = json::array();
  for (const auto& v : violations) {
    doc.push_back({{"code", v.code}, {"subject_id", v.subject_id}, {"message", v.message}});
    ctx.log(v.code + " " + v.subject_id + ": " + v.message);
  }
  detail::write_text_file(ctx.output("violations.json").string(), doc.dump(1) + "\n");
  ctx.log(std::to_string(violations.size()) + " violations");
  return violations.empty() ? kOk : kViolations;
}

int demand_generate(Context& ctx) {
  const auto net = net::load_network(ctx.require(ctx.cfg.paths.network, "network.json", "--network"));
  auto inputs = demand::load_statistics(ctx.require(ctx.cfg.paths.statistics, "statistics.json", "--statistics"));
  apply_demand_overrides(ctx.cfg, inputs.config);
  const auto trips = demand::generate_trips(inputs, net);
  demand::write_trips(trips, ctx.output("trips.json"));
  ctx.log("generated " + std::to_string(trips.trips.size()) + " trips");
  return kOk;
}

int sim_run(Context& ctx) {
  const auto net = net::load_network(ctx.require(ctx.cfg.paths.network, "network.json", "--network"));
  auto routes = load_routes(ctx, net);
  const auto out = sim::run(net, std::move(routes), load_bus_lines(ctx), load_detectors(ctx), sim_config(ctx.cfg));
  sim::write_outputs(out, ctx.output_dir());
  const auto& t = out.totals;
  ctx.log("departed " + std::to_string(t.departed) + ", arrived " + std::to_string(t.arrived) + ", running " +
          std::to_string(t.still_running) + ", not inserted " + std::to_string(t.not_inserted) + ", teleports " +
          std::to_string(t.teleports));
  return kOk;
}

int dua_iterate(Context& ctx) {
  const auto net = net::load_network(ctx.require(ctx.cfg.paths.network, "network.json", "--network"));
  const auto trips = demand::read_trips(ctx.require(ctx.cfg.paths.trips, "trips.json", "--trips"));
  const auto result = eq::dua_iterate(net, trips, dua_config(ctx.cfg));
  sim::write_routes(net, result.routes, ctx.output("routes.json"));
  eq::write_metrics(result.metrics, ctx.output("metrics.csv"));
  for (const auto& m : result.metrics) {
    ctx.log("iteration " + std::to_string(m.iteration) + ": avg_travel_time " + fmt(m.avg_travel_time) +
            " s, avg_speed " + fmt(m.avg_speed) + " m/s");
  }
  ctx.log(result.converged ? "converged after " + std::to_string(result.metrics.size()) + " iterations"
                           : "not converged within " + std::to_string(result.metrics.size()) + " iterations");
  return kOk;
}

int calib_sweep(Context& ctx) {
  const auto net = net::load_network(ctx.require(ctx.cfg.paths.network, "network.json", "--network"));
  const auto split = load_split(ctx);
  const auto real = dataio::ingest(split.modeling, ctx.cfg.ingest.filter).series;

  calib::SweepInputs in;
  in.net = &net;
  in.routes = load_routes(ctx, net);
  in.bus_lines = load_bus_lines(ctx);
  in.detectors = load_detectors(ctx);
  in.real = real;
  in.sim = sim_config(ctx.cfg);
  const auto result = calib::sweep_rerouting_probability(in, ctx.cfg.sweep.grid, ctx.cfg.seed, ctx.cfg.sweep.workers);
  calib::write_sweep(result, ctx.output("sweep.csv"));
  for (const auto& e : result.entries) ctx.log("p=" + fmt(e.p) + " nrmse=" + fmt(e.nrmse));
  ctx.log("best_p " + fmt(result.best_p) + " nrmse " + fmt(result.best_nrmse));
  return kOk;
}

int data_ingest(Context& ctx) {
  const auto split = load_split(ctx);
  const auto& filter = ctx.cfg.ingest.filter;
  const auto modeling = dataio::ingest(split.modeling, filter);
  write_series_csv(modeling.series, ctx.output("modeling_series.csv"));

  std::ostringstream days;
  days << "month,detector_id,days\n";
  for (const auto& [id, n] : modeling.days_per_detector) {
    days << ctx.cfg.ingest.modeling_month << ',' << id << ',' << n << '\n';
  }
  if (split.validation_missing) {
    ctx.warn("no measurements for validation month " + ctx.cfg.ingest.validation_month);
  } else {
    const auto validation = dataio::ingest(split.validation, filter);
    write_series_csv(validation.series, ctx.output("validation_series.csv"));
    for (const auto& [id, n] : validation.days_per_detector) {
      days << ctx.cfg.ingest.validation_month << ',' << id << ',' << n << '\n';
    }
  }
  detail::write_text_file(ctx.output("days_per_detector.csv").string(), days.str());
  ctx.log("ingested " + std::to_string(modeling.series.size()) + " detectors for " + ctx.cfg.ingest.modeling_month);
  return kOk;
}

int report_validate(Context& ctx, const Flags& flags) {
  double p;
  if (flags.p) {
    p = *flags.p;
  } else {
    const fs::path sweep = flags.sweep.empty() ? fs::path{} : fs::path(flags.sweep);
    const auto path = ctx.require(sweep, "sweep.csv", "--sweep or --p");
    p = calib::parse_sweep_csv(detail::read_text_file(path.string()), path.string()).best_p;
  }

  const auto split = load_split(ctx);
  const auto* records = &split.validation;
  if (split.validation_missing) {
    ctx.warn("no measurements for " + ctx.cfg.ingest.validation_month + "; validating against " +
             ctx.cfg.ingest.modeling_month);
    records = &split.modeling;
  }
  const auto real = dataio::ingest(*records, ctx.cfg.ingest.filter).series;

  const auto net = net::load_network(ctx.require(ctx.cfg.paths.network, "network.json", "--network"));
  auto cfg = sim_config(ctx.cfg);
  cfg.rerouting_probability = p;
  const auto out = sim::run(net, load_routes(ctx, net), load_bus_lines(ctx), load_detectors(ctx), cfg);

  std::vector<DetectorSeries> simulated;
  for (const auto& r : real) {
    auto it = out.detector_series.find(r.detector_id);
    if (it == out.detector_series.end()) throw dataio::DetectorMismatchError({r.detector_id});
    simulated.push_back(it->second);
  }
  const auto report = dataio::validate(real, simulated);
  dataio::write_report(report, ctx.output_dir());
  ctx.log("p " + fmt(p) + ": scenario nrmse " + fmt(report.scenario_nrmse) + ", best detector " +
          report.best_detector + ", worst detector " + report.worst_detector);
  return kOk;
}

int fixture_make(Context& ctx) {
  const fs::path dir = ctx.cfg.paths.output_dir;
  fs::create_directories(dir);
  const std::uint64_t seed = ctx.cfg.seed;
  constexpr double kTrueP = 0.6;

  const auto grid = fixtures::grid_network();
  const auto stats = fixtures::grid_statistics(grid, seed);
  const auto detectors = fixtures::grid_detectors(grid);
  const auto buses = fixtures::grid_bus_lines(grid);
  net::save_network(grid, dir / "network.json");
  demand::save_statistics(stats, dir / "statistics.json");
  sim::write_detectors(detectors, dir / "detectors.json");
  detail::write_text_file((dir / "bus_lines.json").string(), sim::bus_lines_to_json(buses));

  ProjectConfig pc;
  pc.seed = seed;
  pc.sim = ctx.cfg.sim;
  pc.equilibrium = ctx.cfg.equilibrium;
  pc.paths.network = dir / "network.json";
  pc.paths.statistics = dir / "statistics.json";
  pc.paths.detectors = dir / "detectors.json";
  pc.paths.bus_lines = dir / "bus_lines.json";
  pc.paths.measurements = dir / "measurements.csv";
  pc.paths.output_dir = dir / "out";
  pc.sweep.grid = {0.0, 1.0, 0.05};
  pc.sweep.workers = ctx.cfg.sweep.workers;
  pc.ingest.filter.exclude_dates = {dataio::parse_date("2019-10-02"), dataio::parse_date("2019-10-03")};
  save_project_config(pc, dir / "project.json");

  // Ground truth: the same pipeline the CLI runs, simulated at the true p.
  auto inputs = stats;
  apply_demand_overrides(pc, inputs.config);
  const auto trips = demand::generate_trips(inputs, grid);
  const auto assignment = eq::dua_iterate(grid, trips, dua_config(pc));
  auto truth_cfg = sim_config(pc);
  truth_cfg.rerouting_probability = kTrueP;
  const auto october = sim::series_of(sim::run(grid, assignment.routes, buses, detectors, truth_cfg));
  truth_cfg.seed = seed + 1;
  const auto november = sim::series_of(sim::run(grid, assignment.routes, buses, detectors, truth_cfg));

  const auto& filter = pc.ingest.filter;
  auto records = fixtures::synthesize_measurements(october, fixtures::month_days(2019, 10), filter,
                                                   dataio::parse_date("2019-10-15"), 0.1, seed);
  const auto nov = fixtures::synthesize_measurements(november, fixtures::month_days(2019, 11), filter,
                                                     std::nullopt, 0.1, seed + 1);
  records.insert(records.end(), nov.begin(), nov.end());
  dataio::write_measurements(records, dir / "measurements.csv");

  const json truth{{"rerouting_probability", kTrueP},
                   {"seed", seed},
                   {"trips", trips.trips.size()},
                   {"modeling_month", pc.ingest.modeling_month},
                   {"validation_month", pc.ingest.validation_month}};
  detail::write_text_file((dir / "fixture_truth.json").string(), truth.dump(1) + "\n");
  ctx.log("fixture written to " + dir.string() + " (" + std::to_string(trips.trips.size()) + " trips, " +
          std::to_string(records.size()) + " measurement records)");
  return kOk;
}

ProjectConfig resolve_config(const Flags& f) {
  ProjectConfig c;
  if (!f.config.empty()) {
    if (!fs::exists(f.config)) throw UsageError("no such config file: " + f.config);
    c = load_project_config(f.config);
  }
  if (f.seed) c.seed = *f.seed;
  if (f.workers) c.sweep.workers = *f.workers;
  if (!f.output_dir.empty()) c.paths.output_dir = f.output_dir;
  if (c.paths.output_dir.empty()) c.paths.output_dir = ".";
  auto set = [](fs::path& dst, const std::string& v) {
    if (!v.empty()) dst = v;
  };
  set(c.paths.network, f.network);
  set(c.paths.statistics, f.statistics);
  set(c.paths.trips, f.trips);
  set(c.paths.routes, f.routes);
  set(c.paths.detectors, f.detectors);
  set(c.paths.bus_lines, f.bus_lines);
  set(c.paths.measurements, f.measurements);
  if (f.p) c.sim.rerouting_probability = *f.p;
  if (f.p_min) c.sweep.grid.p_min = *f.p_min;
  if (f.p_max) c.sweep.grid.p_max = *f.p_max;
  if (f.step) c.sweep.grid.step = *f.step;
  if (c.sweep.workers < 1) throw UsageError("--workers must be >= 1");
  return c;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Traffic demand, simulation and calibration toolkit", "tcal"};
  app.require_subcommand(1);
  Flags f;

  using Action = std::function<int(Context&)>;
  std::vector<std::pair<CLI::App*, Action>> leaves;

  enum Input : unsigned {
    kNetwork = 1, kStatistics = 2, kTrips = 4, kRoutes = 8, kDetectors = 16, kBusLines = 32, kMeasurements = 64
  };
  auto leaf = [&](CLI::App* group, const char* name, const char* help, unsigned inputs, Action action) {
    CLI::App* s = group->add_subcommand(name, help);
    s->add_option("--config", f.config, "Project config file");
    s->add_option("--seed", f.seed, "Top-level seed");
    s->add_option("--workers", f.workers, "Worker threads (calib sweep only)");
    s->add_option("--output-dir", f.output_dir, "Directory for output files");
    if (inputs & kNetwork) s->add_option("--network", f.network, "Network JSON");
    if (inputs & kStatistics) s->add_option("--statistics", f.statistics, "Statistics JSON");
    if (inputs & kTrips) s->add_option("--trips", f.trips, "Trip table JSON");
    if (inputs & kRoutes) s->add_option("--routes", f.routes, "Route file JSON");
    if (inputs & kDetectors) s->add_option("--detectors", f.detectors, "Detector JSON");
    if (inputs & kBusLines) s->add_option("--bus-lines", f.bus_lines, "Bus line JSON");
    if (inputs & kMeasurements) s->add_option("--measurements", f.measurements, "Measurement CSV");
    leaves.emplace_back(s, std::move(action));
    return s;
  };
  auto group = [&](const char* name, const char* help) {
    CLI::App* g = app.add_subcommand(name, help);
    g->require_subcommand(1);
    return g;
  };

  auto* net_g = group("net", "Road network");
  leaf(net_g, "validate", "Check network invariants", kNetwork, net_validate);
  auto* demand_g = group("demand", "Travel demand");
  leaf(demand_g, "generate", "Generate trips from statistics", kNetwork | kStatistics, demand_generate);
  auto* sim_g = group("sim", "Microsimulation");
  auto* run_s = leaf(sim_g, "run", "Simulate one day", kNetwork | kTrips | kRoutes | kDetectors | kBusLines, sim_run);
  run_s->add_option("--p", f.p, "Rerouting probability")->check(CLI::Range(0.0, 1.0));
  auto* dua_g = group("dua", "Dynamic user equilibrium");
  leaf(dua_g, "iterate", "Iterate route choice to equilibrium", kNetwork | kTrips, dua_iterate);
  auto* calib_g = group("calib", "Calibration");
  auto* sweep_s = leaf(calib_g, "sweep", "Sweep the rerouting probability",
                       kNetwork | kTrips | kRoutes | kDetectors | kBusLines | kMeasurements, calib_sweep);
  sweep_s->add_option("--p-min", f.p_min, "Grid start");
  sweep_s->add_option("--p-max", f.p_max, "Grid end");
  sweep_s->add_option("--step", f.step, "Grid step");
  auto* data_g = group("data", "Measurement data");
  leaf(data_g, "ingest", "Average measurements per window", kMeasurements, data_ingest);
  auto* report_g = group("report", "Validation reports");
  auto* report_s = leaf(report_g, "validate", "Compare a simulation with the validation month",
                        kNetwork | kTrips | kRoutes | kDetectors | kBusLines | kMeasurements,
                        [&](Context& ctx) { return report_validate(ctx, f); });
  report_s->add_option("--p", f.p, "Rerouting probability (default: best_p from sweep.csv)")
      ->check(CLI::Range(0.0, 1.0));
  report_s->add_option("--sweep", f.sweep, "Sweep CSV");
  auto* fixture_g = group("fixture", "Synthetic fixtures");
  leaf(fixture_g, "make", "Write the grid twin-experiment fixture", 0, fixture_make);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "[seed=" << f.seed.value_or(0) << "] error: " << e.what() << '\n';
    return kUsage;
  }

  std::uint64_t seed = f.seed.value_or(0);
  try {
    Context ctx(resolve_config(f), out, err);
    seed = ctx.cfg.seed;
    for (auto& [sub, action] : leaves) {
      if (sub->parsed()) return action(ctx);
    }
    err << "[seed=" << seed << "] error: no subcommand\n";
    return kUsage;
  } catch (const UsageError& e) {
    err << "[seed=" << seed << "] error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "[seed=" << seed << "] error: " << e.what() << '\n';
    return kRuntime;
  }
}

}  // namespace tcal::cli
