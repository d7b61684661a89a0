#pragma once

#include <cstdint>
#include <random>

namespace epirenew {

using Rng = std::mt19937_64;

/// splitmix64 step; used to decorrelate derived seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Independent, reproducible RNG stream for (seed, stream_index).
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream_index) {
  std::uint64_t s = seed;
  splitmix64(s);
  s ^= 0x5851f42d4c957f2dULL * (stream_index + 1);
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Rng(seq);
}

}  // namespace epirenew
