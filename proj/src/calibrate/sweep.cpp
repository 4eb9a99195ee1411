#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <set>
#include <thread>

#include "common/csv.hpp"
#include "common/strict_json.hpp"
#include "tcal/calibrate.hpp"

namespace tcal::calib {

std::vector<double> grid_points(const Grid& g) {
  if (!(g.step > 0)) throw ConfigError("sweep grid: step must be > 0");
  if (!(g.p_min >= 0 && g.p_max <= 1 && g.p_min <= g.p_max)) throw ConfigError("sweep grid: need 0 <= p_min <= p_max <= 1");
  const auto n = static_cast<std::size_t>(std::floor((g.p_max - g.p_min) / g.step + 1e-9)) + 1;
  std::vector<double> pts;
  pts.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    pts.push_back(std::round((g.p_min + static_cast<double>(k) * g.step) * 1e9) / 1e9);
  }
  return pts;
}

SweepResult select_best(std::vector<SweepEntry> entries) {
  std::sort(entries.begin(), entries.end(), [](const SweepEntry& a, const SweepEntry& b) { return a.p < b.p; });
  SweepResult r;
  r.entries = std::move(entries);
  if (r.entries.empty()) return r;
  const SweepEntry* best = &r.entries.front();
  for (const auto& e : r.entries) {
    if (e.nrmse < best->nrmse) best = &e;
  }
  r.best_p = best->p;
  r.best_nrmse = best->nrmse;
  return r;
}

double objective(const std::vector<DetectorSeries>& real, const sim::SimOutput& out) {
  std::vector<DetectorSeries> simulated;
  simulated.reserve(real.size());
  for (const auto& r : real) {
    const auto it = out.detector_series.find(r.detector_id);
    if (it == out.detector_series.end()) throw Error("no simulated detector '" + r.detector_id + "'");
    simulated.push_back(it->second);
  }
  return nrmse(aggregate_series(real).counts, aggregate_series(simulated).counts);
}

SweepResult sweep_rerouting_probability(const SweepInputs& in, const Grid& grid, std::uint64_t seed,
                                        unsigned workers) {
  if (in.net == nullptr) throw ConfigError("sweep: no network");
  const std::vector<double> pts = grid_points(grid);
  std::set<std::string> simulated_ids;
  for (const auto& d : in.detectors) simulated_ids.insert(d.id);
  for (const auto& d : in.detectors) {
    if (std::none_of(in.real.begin(), in.real.end(), [&](const DetectorSeries& s) { return s.detector_id == d.id; }))
      throw ConfigError("sweep: no real series for detector '" + d.id + "'");
  }
  for (const auto& s : in.real) {
    check_series(s);
    if (!simulated_ids.count(s.detector_id)) throw ConfigError("sweep: real series '" + s.detector_id + "' has no detector");
  }
  if (in.real.empty()) throw ConfigError("sweep: no real series");

  std::vector<SweepEntry> entries(pts.size());
  std::vector<std::exception_ptr> errors(pts.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < pts.size(); i = next++) {
      try {
        sim::SimConfig cfg = in.sim;
        cfg.rerouting_probability = pts[i];
        cfg.seed = seed;
        const auto out = sim::run(*in.net, in.routes, in.bus_lines, in.detectors, cfg);
        entries[i] = {pts[i], objective(in.real, out)};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(pts.size())));
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw SweepError(pts[i], e.what());
    }
  }
  return select_best(std::move(entries));
}

std::string sweep_to_csv(const SweepResult& r) {
  std::string out = "p,nrmse\n";
  for (const auto& e : r.entries) out += format_number(e.p) + "," + format_number(e.nrmse) + "\n";
  out += "best_p,best_nrmse\n";
  out += format_number(r.best_p) + "," + format_number(r.best_nrmse) + "\n";
  return out;
}

void write_sweep(const SweepResult& r, const std::filesystem::path& path) {
  detail::write_text_file(path.string(), sweep_to_csv(r));
}

SweepResult parse_sweep_csv(std::string_view text, std::string_view source) {
  detail::CsvReader csv(text, source);
  csv.expect_header("p,nrmse");
  SweepResult r;
  std::vector<std::string_view> f;
  bool summary = false;
  while (csv.next(f)) {
    if (f.size() != 2) csv.fail("expected 2 fields");
    if (f[0] == "best_p") {
      if (!csv.next(f) || f.size() != 2) csv.fail("missing summary values");
      r.best_p = csv.number(f[0], "best_p");
      r.best_nrmse = csv.number(f[1], "best_nrmse");
      summary = true;
      break;
    }
    r.entries.push_back({csv.number(f[0], "p"), csv.number(f[1], "nrmse")});
  }
  if (!summary) csv.fail("missing best_p,best_nrmse summary");
  return r;
}

}  // namespace tcal::calib
