#include "tcal/core.hpp"

namespace tcal {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t substream_seed(std::uint64_t seed, std::string_view name) noexcept {
  // FNV-1a over the stream name, then mixed with the seed.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(seed ^ mix64(h));
}

double uniform01(std::uint64_t key, std::uint64_t a, std::uint64_t b) noexcept {
  const std::uint64_t bits = mix64(key ^ mix64(a ^ mix64(b + 0x632be59bd9b4e019ULL)));
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace tcal
