#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace csrbm {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a tuple of
/// indices (step, member, replicate, ...). Order of the indices matters.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  return Rng(derive_seed(seed, keys));
}

// Stream tags keep differently purposed streams apart under a shared seed.
namespace stream {
inline constexpr std::uint64_t batch_plan = 0xba7c4;
inline constexpr std::uint64_t companions = 0xc0a9;
inline constexpr std::uint64_t initial = 0x1417;
inline constexpr std::uint64_t subsample = 0x5ab5;
inline constexpr std::uint64_t replicate = 0x4e91;
inline constexpr std::uint64_t kernel_check = 0x6e41;
}  // namespace stream

}  // namespace csrbm
