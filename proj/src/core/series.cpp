#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include "common/csv.hpp"
#include "common/strict_json.hpp"
#include "tcal/series.hpp"

namespace tcal {

std::string format_number(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

void check_series(const DetectorSeries& s) {
  if (s.counts.size() != kWindowsPerDay)
    throw Error("series '" + s.detector_id + "' has " + std::to_string(s.counts.size()) + " windows, expected 96");
  for (double c : s.counts) {
    if (!(std::isfinite(c) && c >= 0)) throw Error("series '" + s.detector_id + "' has an invalid count");
  }
}

std::string series_to_csv(const std::vector<DetectorSeries>& series) {
  std::string out = "detector_id,window_start_s,count\n";
  for (const auto& s : series) {
    if (s.detector_id.find_first_of(",\n\r") != std::string::npos)
      throw Error("detector id '" + s.detector_id + "' cannot be written to CSV");
    const double window = kDaySeconds / static_cast<double>(std::max<std::size_t>(1, s.counts.size()));
    for (std::size_t w = 0; w < s.counts.size(); ++w) {
      out += s.detector_id;
      out += ',';
      out += format_number(static_cast<double>(w) * window);
      out += ',';
      out += format_number(s.counts[w]);
      out += '\n';
    }
  }
  return out;
}

void write_series_csv(const std::vector<DetectorSeries>& series, const std::filesystem::path& path) {
  detail::write_text_file(path.string(), series_to_csv(series));
}

std::vector<DetectorSeries> parse_series_csv(std::string_view text, SeriesOrigin origin, std::string_view source) {
  detail::CsvReader csv(text, source);
  csv.expect_header("detector_id,window_start_s,count");
  std::map<std::string, std::vector<double>> by_id;
  std::map<std::string, std::vector<bool>> seen;
  std::vector<std::string_view> f;
  while (csv.next(f)) {
    if (f.size() != 3) csv.fail("expected 3 fields");
    const std::string id(f[0]);
    if (id.empty()) csv.fail("empty detector id");
    const double start = csv.number(f[1], "window_start_s");
    const double count = csv.number(f[2], "count");
    const double w = start / kWindowSeconds;
    if (!(w >= 0 && w < kWindowsPerDay && w == std::floor(w))) csv.fail("window_start_s must be a multiple of 900 in [0, 86400)");
    if (!(std::isfinite(count) && count >= 0)) csv.fail("count must be finite and >= 0");
    auto& counts = by_id[id];
    auto& mark = seen[id];
    if (counts.empty()) {
      counts.assign(kWindowsPerDay, 0.0);
      mark.assign(kWindowsPerDay, false);
    }
    const auto wi = static_cast<std::size_t>(w);
    if (mark[wi]) csv.fail("duplicate window for detector '" + id + "'");
    mark[wi] = true;
    counts[wi] = count;
  }
  std::vector<DetectorSeries> out;
  for (auto& [id, counts] : by_id) {
    const auto& mark = seen[id];
    if (std::count(mark.begin(), mark.end(), true) != static_cast<long>(kWindowsPerDay))
      throw ParseError(std::string(source) + ": detector '" + id + "' does not have all 96 windows");
    out.push_back(DetectorSeries{id, std::move(counts), origin});
  }
  return out;
}

std::vector<DetectorSeries> read_series_csv(const std::filesystem::path& path, SeriesOrigin origin) {
  return parse_series_csv(detail::read_text_file(path.string()), origin, path.string());
}

}  // namespace tcal
