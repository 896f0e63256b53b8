#pragma once

#include <cstdint>
#include <random>

namespace spiked {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent per-trial streams from a
// master seed so that trial i is reproducible on its own.
constexpr std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t master, std::uint64_t index = 0) {
  return Rng{mix_seed(master, index)};
}

inline double standard_normal(Rng& rng) {
  return std::normal_distribution<double>{}(rng);
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>{}(rng);
}

}  // namespace spiked
