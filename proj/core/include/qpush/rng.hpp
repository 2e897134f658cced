#pragma once

#include <cstdint>
#include <random>

namespace qpush {

// SplitMix64 step; mixes the state and returns the next output word.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Engine for stream `index` of run `seed`.  Counter-based derivation: the
// stream depends only on (seed, index), never on which thread draws it.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (index + 1));
  const std::uint64_t a = splitmix64(s);
  const std::uint64_t b = splitmix64(s);
  std::seed_seq seq{
      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace qpush
