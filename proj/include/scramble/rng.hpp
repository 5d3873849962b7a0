#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace scramble {

/// Engine used for every stochastic component.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used only to decorrelate seed material.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Reproducible per-trajectory streams.
///
/// Stream k is an mt19937_64 seeded through std::seed_seq with four 32-bit
/// words taken from mix64(master ^ mix64(k)) and its successor. Trajectory k
/// therefore depends on (master_seed, k) only, whichever worker runs it.
struct RngPolicy {
  std::uint64_t master_seed = 0;

  Rng stream(std::uint64_t index) const {
    const std::uint64_t a = mix64(master_seed ^ mix64(index));
    const std::uint64_t b = mix64(a);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return Rng(seq);
  }

  /// Independent policy for a named sub-experiment.
  RngPolicy fork(std::string_view tag) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (char c : tag) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
    return RngPolicy{mix64(master_seed + mix64(h))};
  }
};

}  // namespace scramble
