#pragma once

// Measurement ingestion (day filtering, per-window averaging, month split)
// and the validation report comparing real against simulated detector series.

#include <array>
#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tcal/series.hpp"

namespace tcal::dataio {

using Date = std::chrono::year_month_day;

/// Strict YYYY-MM-DD; throws ParseError otherwise.
Date parse_date(std::string_view text);
std::string format_date(const Date& d);
/// "YYYY-MM"
std::string month_label(const Date& d);

struct RawMeasurement {
  std::string detector_id;
  Date date;
  int window_start = 0;  // multiple of 900 in [0, 85500]
  double count = 0.0;
  bool operator==(const RawMeasurement&) const = default;
};

struct IngestionFilter {
  /// Indexed by weekday c_encoding (0 = Sunday). Default Tue, Wed, Thu.
  std::array<bool, 7> include_weekdays{false, false, true, true, true, false, false};
  std::vector<Date> exclude_dates;
  std::optional<Date> first_day;
  std::optional<Date> last_day;
  bool operator==(const IngestionFilter&) const = default;
};

/// Throws ConfigError when first_day > last_day.
void check_filter(const IngestionFilter& f);
/// True when the filter keeps this calendar day.
bool day_allowed(const IngestionFilter& f, const Date& d);

class NoSurvivingDaysError : public Error {
 public:
  explicit NoSurvivingDaysError(std::string detector)
      : Error("no surviving days for detector '" + detector + "'"), detector_(std::move(detector)) {}
  const std::string& detector_id() const noexcept { return detector_; }

 private:
  std::string detector_;
};

struct IngestResult {
  std::vector<DetectorSeries> series;        // origin real, sorted by id
  std::map<std::string, int> days_per_detector;
};

/// A day counts for a detector only if the filter keeps it and every one of
/// its 96 windows appears exactly once. Each window is the mean over the
/// surviving days.
IngestResult ingest(const std::vector<RawMeasurement>& records, const IngestionFilter& filter);

std::vector<RawMeasurement> parse_measurements(std::string_view csv_text, std::string_view source = "<memory>");
std::vector<RawMeasurement> read_measurements(const std::filesystem::path& path);
/// `detector_id,date,window_start_s,count`
std::string measurements_to_csv(const std::vector<RawMeasurement>& records);
void write_measurements(const std::vector<RawMeasurement>& records, const std::filesystem::path& path);

class MissingMonthError : public Error {
 public:
  explicit MissingMonthError(const std::string& month) : Error("no measurements for month " + month) {}
};

struct DatasetSplit {
  std::vector<RawMeasurement> modeling;
  std::vector<RawMeasurement> validation;
  bool validation_missing = false;
};

/// Partition by month label. Throws MissingMonthError when the modeling month
/// has no data; a missing validation month is only flagged.
DatasetSplit split_dataset(const std::vector<RawMeasurement>& records, const std::string& modeling_month,
                           const std::string& validation_month);

// --- validation report ------------------------------------------------------

struct WindowError {
  double absolute_error = 0.0;
  /// Across detectors in this window; empty when the window's real mean is 0
  /// but the series differ.
  std::optional<double> nrmse;
  bool operator==(const WindowError&) const = default;
};

struct DetectorScore {
  std::string detector_id;
  std::optional<double> nrmse;  // empty when undefined (zero real mean)
  bool operator==(const DetectorScore&) const = default;
};

struct ValidationReport {
  double scenario_nrmse = 0.0;
  std::vector<WindowError> per_window;      // 96 entries
  std::vector<DetectorScore> per_detector;  // ascending nrmse, undefined last, ties by id
  std::string best_detector;
  std::string worst_detector;
  bool operator==(const ValidationReport&) const = default;
};

class DetectorMismatchError : public Error {
 public:
  explicit DetectorMismatchError(std::vector<std::string> ids);
  const std::vector<std::string>& detector_ids() const noexcept { return ids_; }

 private:
  std::vector<std::string> ids_;
};

ValidationReport validate(const std::vector<DetectorSeries>& real, const std::vector<DetectorSeries>& sim);

std::string report_to_json(const ValidationReport& r);
ValidationReport parse_report(std::string_view json_text, std::string_view source = "<memory>");
/// report.json, per_window.csv and per_detector.csv in `dir`.
void write_report(const ValidationReport& r, const std::filesystem::path& dir);

}  // namespace tcal::dataio
