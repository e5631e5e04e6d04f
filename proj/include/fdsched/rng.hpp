#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace fdsched {

/// Deterministic seed derivation. Every random quantity in a run is drawn from
/// a stream keyed by (master seed, drop, slot, tag), so serial and parallel
/// executions consume identical numbers.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(master);
  for (auto k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

/// SplitMix64 stream satisfying UniformRandomBitGenerator. Cheap to construct,
/// which matters because a fresh stream is opened per slot.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  explicit StreamRng(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Stream tags.
inline constexpr std::uint64_t kTagPlacement = 1;
inline constexpr std::uint64_t kTagShadowing = 2;
inline constexpr std::uint64_t kTagFading = 3;
inline constexpr std::uint64_t kTagLos = 4;

}  // namespace fdsched
