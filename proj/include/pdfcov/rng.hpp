/**
 * @file rng.hpp
 * @brief Seed derivation for reproducible, order-independent Monte Carlo streams.
 *
 * Every random stream in the library is a std::mt19937_64 seeded from a
 * 64-bit value derived by hashing a tuple such as
 * (master_seed, scenario_hash, path_index, stream_tag). Streams therefore do
 * not depend on scheduling order or on the number of worker threads.
 */
#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace pdfcov {

using Rng = std::mt19937_64;

/// Stream tags keep price, noise and sampling draws independent.
enum class Stream : std::uint64_t {
  kPrice = 0x70726963ULL,
  kNoise = 0x6e6f6973ULL,
  kSampling = 0x73616d70ULL,
  kAux = 0x61757878ULL,
};

/// SplitMix64 finalizer.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p));
  return h;
}

inline constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream tag, std::uint64_t index) noexcept {
  return derive_seed({seed, static_cast<std::uint64_t>(tag), index});
}

/// FNV-1a, used to hash canonical scenario strings.
inline constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

}  // namespace pdfcov
