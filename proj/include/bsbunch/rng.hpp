#pragma once

// Counter-based random streams. Every random decision in a run is drawn from
// a short SplitMix64 sequence keyed by (seed, purpose, index), so the result
// for a given slot never depends on which worker generated it or in which
// order slots were visited.

#include <cstdint>
#include <limits>

namespace bsbunch {

/// Purpose tags that keep substreams for different decisions disjoint.
enum class StreamTag : std::uint64_t {
  SourceBlock = 1,
  SlotPhase = 2,
  SlotRouting = 3,
  DarkCounts = 4,
  Acquisition = 5,
  Standalone = 6,
};

constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t substream_key(std::uint64_t seed, StreamTag tag, std::uint64_t index) {
  std::uint64_t k = splitmix64_mix(seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(tag) + 1));
  k = splitmix64_mix(k ^ (index * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
  return k;
}

/// Seed of the k-th repeated acquisition of a run.
constexpr std::uint64_t acquisition_seed(std::uint64_t seed, std::uint64_t k) {
  return substream_key(seed, StreamTag::Acquisition, k);
}

/// SplitMix64 stream; satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  constexpr explicit CounterRng(std::uint64_t state) : state_(state) {}
  constexpr CounterRng(std::uint64_t seed, StreamTag tag, std::uint64_t index)
      : state_(substream_key(seed, tag, index)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return splitmix64_mix(state_);
  }

  /// Uniform on [0, 1) with 53 random bits.
  constexpr double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe to take the logarithm of.
  constexpr double uniform_positive() { return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53; }

  constexpr bool coin() { return ((*this)() >> 63) != 0; }

 private:
  std::uint64_t state_;
};

}  // namespace bsbunch
