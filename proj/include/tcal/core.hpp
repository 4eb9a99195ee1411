#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tcal {

/// Dense index of an edge inside a RoadNetwork. Edges are indexed in
/// lexicographic id order, so index order doubles as the routing tie-break.
using EdgeIdx = std::uint32_t;
using JunctionIdx = std::uint32_t;

inline constexpr EdgeIdx kNoEdge = std::numeric_limits<EdgeIdx>::max();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline constexpr double kDaySeconds = 86400.0;
inline constexpr double kWindowSeconds = 900.0;
inline constexpr std::size_t kWindowsPerDay = 96;

/// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; the message carries the line or field path.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// An object refers to an id that does not exist.
class DanglingReference : public Error {
 public:
  DanglingReference(std::string id, const std::string& context)
      : Error("dangling reference to '" + id + "' in " + context), id_(std::move(id)) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

/// Invalid configuration values detected before any work starts.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// --- Seeded random streams ------------------------------------------------

/// SplitMix64 finalizer; good avalanche, used to derive independent seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derive a named sub-stream seed (e.g. "demand", "sim", "equilibrium") from
/// the single top-level seed.
std::uint64_t substream_seed(std::uint64_t seed, std::string_view name) noexcept;

/// Counter-based uniform draw in [0, 1). Same inputs always give the same
/// value, independent of call order.
double uniform01(std::uint64_t key, std::uint64_t a, std::uint64_t b = 0) noexcept;

}  // namespace tcal
