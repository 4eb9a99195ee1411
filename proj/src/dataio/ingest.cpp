#include <algorithm>
#include <charconv>
#include <cmath>

#include "common/csv.hpp"
#include "common/strict_json.hpp"
#include "tcal/dataio.hpp"

namespace tcal::dataio {

namespace {

int digits(std::string_view s) {
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return -1;
  return v;
}

}  // namespace

Date parse_date(std::string_view text) {
  const bool shape = text.size() == 10 && text[4] == '-' && text[7] == '-' &&
                     std::all_of(text.begin(), text.end(), [](char c) { return c == '-' || (c >= '0' && c <= '9'); });
  if (shape) {
    const Date d{std::chrono::year{digits(text.substr(0, 4))},
                 std::chrono::month{static_cast<unsigned>(digits(text.substr(5, 2)))},
                 std::chrono::day{static_cast<unsigned>(digits(text.substr(8, 2)))}};
    if (d.ok()) return d;
  }
  throw ParseError("invalid date '" + std::string(text) + "', expected YYYY-MM-DD");
}

std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                static_cast<unsigned>(d.day()));
  return buf;
}

std::string month_label(const Date& d) { return format_date(d).substr(0, 7); }

void check_filter(const IngestionFilter& f) {
  if (f.first_day && f.last_day && std::chrono::sys_days(*f.first_day) > std::chrono::sys_days(*f.last_day))
    throw ConfigError("ingestion filter: first_day is after last_day");
}

bool day_allowed(const IngestionFilter& f, const Date& d) {
  const std::chrono::weekday wd{std::chrono::sys_days(d)};
  if (!f.include_weekdays[wd.c_encoding()]) return false;
  if (f.first_day && std::chrono::sys_days(d) < std::chrono::sys_days(*f.first_day)) return false;
  if (f.last_day && std::chrono::sys_days(d) > std::chrono::sys_days(*f.last_day)) return false;
  return std::find(f.exclude_dates.begin(), f.exclude_dates.end(), d) == f.exclude_dates.end();
}

IngestResult ingest(const std::vector<RawMeasurement>& records, const IngestionFilter& filter) {
  check_filter(filter);
  struct Day {
    std::array<double, kWindowsPerDay> counts{};
    std::array<int, kWindowsPerDay> hits{};
  };
  std::map<std::string, std::map<std::chrono::sys_days, Day>> by_detector;
  for (const auto& r : records) {
    if (r.window_start < 0 || r.window_start % 900 != 0 || r.window_start >= static_cast<int>(kDaySeconds))
      throw Error("measurement for '" + r.detector_id + "' has an invalid window start");
    if (!(std::isfinite(r.count) && r.count >= 0))
      throw Error("measurement for '" + r.detector_id + "' has an invalid count");
    auto& days = by_detector[r.detector_id];
    if (!day_allowed(filter, r.date)) continue;
    Day& day = days[std::chrono::sys_days(r.date)];
    const auto w = static_cast<std::size_t>(r.window_start / 900);
    day.counts[w] = r.count;
    ++day.hits[w];
  }

  IngestResult result;
  for (const auto& [id, days] : by_detector) {
    std::vector<double> sum(kWindowsPerDay, 0.0);
    int used = 0;
    for (const auto& [date, day] : days) {
      if (!std::all_of(day.hits.begin(), day.hits.end(), [](int h) { return h == 1; })) continue;
      for (std::size_t w = 0; w < kWindowsPerDay; ++w) sum[w] += day.counts[w];
      ++used;
    }
    if (used == 0) throw NoSurvivingDaysError(id);
    for (double& v : sum) v /= used;
    result.series.push_back(DetectorSeries{id, std::move(sum), SeriesOrigin::real});
    result.days_per_detector[id] = used;
  }
  return result;
}

std::vector<RawMeasurement> parse_measurements(std::string_view text, std::string_view source) {
  detail::CsvReader csv(text, source);
  csv.expect_header("detector_id,date,window_start_s,count");
  std::vector<RawMeasurement> out;
  std::vector<std::string_view> f;
  while (csv.next(f)) {
    if (f.size() != 4) csv.fail("expected 4 fields");
    RawMeasurement m;
    m.detector_id = std::string(f[0]);
    if (m.detector_id.empty()) csv.fail("empty detector id");
    try {
      m.date = parse_date(f[1]);
    } catch (const ParseError& e) {
      csv.fail(e.what());
    }
    const long long w = csv.integer(f[2], "window_start_s");
    if (w < 0 || w >= 86400 || w % 900 != 0) csv.fail("window_start_s must be a multiple of 900 in [0, 85500]");
    m.window_start = static_cast<int>(w);
    m.count = csv.number(f[3], "count");
    if (!(std::isfinite(m.count) && m.count >= 0)) csv.fail("count must be finite and >= 0");
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<RawMeasurement> read_measurements(const std::filesystem::path& path) {
  return parse_measurements(detail::read_text_file(path.string()), path.string());
}

std::string measurements_to_csv(const std::vector<RawMeasurement>& records) {
  std::string out = "detector_id,date,window_start_s,count\n";
  for (const auto& r : records) {
    out += r.detector_id + "," + format_date(r.date) + "," + std::to_string(r.window_start) + "," +
           format_number(r.count) + "\n";
  }
  return out;
}

void write_measurements(const std::vector<RawMeasurement>& records, const std::filesystem::path& path) {
  detail::write_text_file(path.string(), measurements_to_csv(records));
}

DatasetSplit split_dataset(const std::vector<RawMeasurement>& records, const std::string& modeling_month,
                           const std::string& validation_month) {
  if (modeling_month == validation_month) throw ConfigError("modeling and validation month must differ");
  DatasetSplit split;
  for (const auto& r : records) {
    const std::string m = month_label(r.date);
    if (m == modeling_month) split.modeling.push_back(r);
    else if (m == validation_month) split.validation.push_back(r);
  }
  if (split.modeling.empty()) throw MissingMonthError(modeling_month);
  split.validation_missing = split.validation.empty();
  return split;
}

}  // namespace tcal::dataio
