#include "optoretro/rng.hpp"

namespace optoretro {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t shot_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(master ^ splitmix64(index + 1));
}

Rng make_stream(std::uint64_t seed, Stream stream) noexcept {
  return Rng(splitmix64(seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(stream)));
}

}  // namespace optoretro
