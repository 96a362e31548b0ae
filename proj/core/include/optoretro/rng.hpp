#pragma once

#include <cstdint>
#include <random>

namespace optoretro {

using Rng = std::mt19937_64;

/// Independent random streams owned by one shot.
enum class Stream : std::uint64_t {
  Frequency = 1,
  InitialState = 2,
  Process = 3,
  ShotNoise = 4,
  Auxiliary = 5,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of shot `index` under `master`: splitmix64(master ^ splitmix64(index + 1)).
std::uint64_t shot_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Engine for one stream of a shot: seeded with splitmix64(seed + 0x9E3779B97F4A7C15 * stream).
Rng make_stream(std::uint64_t seed, Stream stream) noexcept;

inline double standard_normal(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return n(rng);
}

}  // namespace optoretro
