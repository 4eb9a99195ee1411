#include <algorithm>
#include <cmath>
#include <set>

#include "common/strict_json.hpp"
#include "tcal/calibrate.hpp"
#include "tcal/dataio.hpp"

namespace tcal::dataio {

using detail::json;
using detail::StrictObject;

namespace {

std::string join(const std::vector<std::string>& ids) {
  std::string s;
  for (const auto& id : ids) s += (s.empty() ? "" : ", ") + id;
  return s;
}

// nrmse that treats a zero real mean as defined only for identical series.
std::optional<double> safe_nrmse(std::span<const double> real, std::span<const double> sim) {
  try {
    return calib::nrmse(real, sim);
  } catch (const calib::ZeroMeanError&) {
    if (std::equal(real.begin(), real.end(), sim.begin())) return 0.0;
    return std::nullopt;
  }
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional(StrictObject& o, const char* key) {
  const json& v = o.raw(key);
  if (v.is_null()) return std::nullopt;
  if (!v.is_number()) o.fail(key, "expected a number or null");
  return v.get<double>();
}

}  // namespace

DetectorMismatchError::DetectorMismatchError(std::vector<std::string> ids)
    : Error("detector sets differ: " + join(ids)), ids_(std::move(ids)) {}

ValidationReport validate(const std::vector<DetectorSeries>& real, const std::vector<DetectorSeries>& sim) {
  std::map<std::string, const DetectorSeries*> r_by, s_by;
  for (const auto& s : real) {
    check_series(s);
    if (!r_by.emplace(s.detector_id, &s).second) throw Error("duplicate real series '" + s.detector_id + "'");
  }
  for (const auto& s : sim) {
    check_series(s);
    if (!s_by.emplace(s.detector_id, &s).second) throw Error("duplicate simulated series '" + s.detector_id + "'");
  }
  std::vector<std::string> mismatch;
  for (const auto& [id, _] : r_by) {
    if (!s_by.count(id)) mismatch.push_back(id);
  }
  for (const auto& [id, _] : s_by) {
    if (!r_by.count(id)) mismatch.push_back(id);
  }
  if (!mismatch.empty()) {
    std::sort(mismatch.begin(), mismatch.end());
    throw DetectorMismatchError(std::move(mismatch));
  }
  if (r_by.empty()) throw Error("validate: no detector series");

  std::vector<DetectorSeries> r_sorted, s_sorted;
  for (const auto& [id, s] : r_by) r_sorted.push_back(*s);
  for (const auto& [id, s] : s_by) s_sorted.push_back(*s);

  ValidationReport rep;
  const auto r_total = calib::aggregate_series(r_sorted);
  const auto s_total = calib::aggregate_series(s_sorted);
  const auto scenario = safe_nrmse(r_total.counts, s_total.counts);
  if (!scenario) throw calib::ZeroMeanError();
  rep.scenario_nrmse = *scenario;

  const std::size_t n = r_sorted.size();
  std::vector<double> rw(n), sw(n);
  for (std::size_t w = 0; w < kWindowsPerDay; ++w) {
    for (std::size_t d = 0; d < n; ++d) {
      rw[d] = r_sorted[d].counts[w];
      sw[d] = s_sorted[d].counts[w];
    }
    rep.per_window.push_back({std::abs(r_total.counts[w] - s_total.counts[w]), safe_nrmse(rw, sw)});
  }

  for (std::size_t d = 0; d < n; ++d) {
    rep.per_detector.push_back({r_sorted[d].detector_id, safe_nrmse(r_sorted[d].counts, s_sorted[d].counts)});
  }
  std::stable_sort(rep.per_detector.begin(), rep.per_detector.end(), [](const DetectorScore& a, const DetectorScore& b) {
    if (a.nrmse.has_value() != b.nrmse.has_value()) return a.nrmse.has_value();
    if (a.nrmse && *a.nrmse != *b.nrmse) return *a.nrmse < *b.nrmse;
    return a.detector_id < b.detector_id;
  });
  std::vector<const DetectorScore*> ranked;
  for (const auto& s : rep.per_detector) {
    if (s.nrmse) ranked.push_back(&s);
  }
  if (!ranked.empty()) {
    rep.best_detector = ranked.front()->detector_id;
    rep.worst_detector = ranked.back()->detector_id;
  }
  return rep;
}

std::string report_to_json(const ValidationReport& r) {
  json windows = json::array();
  for (std::size_t w = 0; w < r.per_window.size(); ++w) {
    windows.push_back({{"window_start_s", static_cast<int>(w) * 900},
                       {"absolute_error", r.per_window[w].absolute_error},
                       {"window_nrmse", optional_number(r.per_window[w].nrmse)}});
  }
  json detectors = json::array();
  for (const auto& d : r.per_detector) {
    detectors.push_back({{"detector_id", d.detector_id}, {"nrmse", optional_number(d.nrmse)}});
  }
  json doc{{"scenario_nrmse", r.scenario_nrmse},
           {"per_window", windows},
           {"per_detector", detectors},
           {"best_detector", r.best_detector},
           {"worst_detector", r.worst_detector}};
  return doc.dump(1) + "\n";
}

ValidationReport parse_report(std::string_view json_text, std::string_view source) {
  const json doc = detail::parse_document(json_text, source);
  StrictObject root(doc, "", source);
  ValidationReport r;
  r.scenario_nrmse = root.number("scenario_nrmse");
  const json& windows = root.array("per_window");
  if (windows.size() != kWindowsPerDay) root.fail("per_window", "expected 96 entries");
  for (std::size_t w = 0; w < windows.size(); ++w) {
    StrictObject o(windows[w], root.child_path("per_window", w), source);
    if (o.integer("window_start_s") != static_cast<long long>(w) * 900) o.fail("window_start_s", "out of order");
    WindowError e;
    e.absolute_error = o.number("absolute_error");
    e.nrmse = read_optional(o, "window_nrmse");
    o.finish();
    r.per_window.push_back(e);
  }
  const json& detectors = root.array("per_detector");
  for (std::size_t i = 0; i < detectors.size(); ++i) {
    StrictObject o(detectors[i], root.child_path("per_detector", i), source);
    DetectorScore s;
    s.detector_id = o.string("detector_id");
    s.nrmse = read_optional(o, "nrmse");
    o.finish();
    r.per_detector.push_back(std::move(s));
  }
  r.best_detector = root.string("best_detector");
  r.worst_detector = root.string("worst_detector");
  root.finish();
  return r;
}

void write_report(const ValidationReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  detail::write_text_file((dir / "report.json").string(), report_to_json(r));
  std::string pw = "window,abs_error,nrmse\n";
  for (std::size_t w = 0; w < r.per_window.size(); ++w) {
    const auto& e = r.per_window[w];
    pw += std::to_string(w) + "," + format_number(e.absolute_error) + "," + (e.nrmse ? format_number(*e.nrmse) : "") + "\n";
  }
  detail::write_text_file((dir / "per_window.csv").string(), pw);
  std::string pd = "detector_id,nrmse\n";
  for (const auto& d : r.per_detector) pd += d.detector_id + "," + (d.nrmse ? format_number(*d.nrmse) : "") + "\n";
  detail::write_text_file((dir / "per_detector.csv").string(), pd);
}

}  // namespace tcal::dataio
