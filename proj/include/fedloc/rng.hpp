#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace fedloc {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to decorrelate derived seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a, stable across platforms (unlike std::hash).
constexpr std::uint64_t hash_string(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
  return mix64(base ^ mix64(hash_string(tag)));
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return mix64(base ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// Stream for one (scenario, service, query) triple. Response values depend
/// only on these three, never on request ordering.
inline Rng query_stream(std::uint64_t scenario_seed, std::string_view service_id,
                        std::string_view query_id) {
  return Rng(derive_seed(derive_seed(scenario_seed, service_id), query_id));
}

}  // namespace fedloc
