#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tcal/core.hpp"

namespace tcal {

enum class SeriesOrigin { real, simulated };

/// Vehicle counts of one detector in 96 consecutive 15-minute windows.
struct DetectorSeries {
  std::string detector_id;
  std::vector<double> counts;
  SeriesOrigin origin = SeriesOrigin::simulated;
  bool operator==(const DetectorSeries&) const = default;
};

/// Throws Error unless the series has exactly 96 finite, non-negative counts.
void check_series(const DetectorSeries& s);

/// CSV `detector_id,window_start_s,count`, 96 rows per detector, detectors in
/// the given order. Counts are written with full precision.
std::string series_to_csv(const std::vector<DetectorSeries>& series);
void write_series_csv(const std::vector<DetectorSeries>& series, const std::filesystem::path& path);
/// Inverse of series_to_csv; detectors come back sorted by id.
std::vector<DetectorSeries> parse_series_csv(std::string_view text, SeriesOrigin origin,
                                             std::string_view source = "<memory>");
std::vector<DetectorSeries> read_series_csv(const std::filesystem::path& path, SeriesOrigin origin);

/// Shortest decimal text that reads back to the same double.
std::string format_number(double v);

}  // namespace tcal
