#pragma once

// Attenuated CW laser as a sequence of equal time slots, each holding a
// Poisson number of photons.
//
// The slot range is cut into fixed blocks of kSourceBlockSlots slots. Each
// block draws from its own substream and visits only occupied slots by
// sampling geometric gaps, so a block's content is fixed by (seed, block)
// alone. The dense stream is the same sequence with the empty slots filled
// back in.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsbunch/rng.hpp"
#include "bsbunch/types.hpp"

namespace bsbunch {

inline constexpr std::uint64_t kSourceBlockSlots = std::uint64_t{1} << 20;
inline constexpr double kMaxMeanPhotonNumber = 10.0;
// Upper bound on the slot count of one acquisition; keeps slot timestamps
// exactly representable and index arithmetic overflow-free.
inline constexpr std::uint64_t kMaxSlotCount = std::uint64_t{1} << 50;

struct SourceConfig {
  double mean_photon_number = 0.022;
  double slot_rate = 7.78e7;  // slots per second
  double duration = 1.0;      // seconds
  std::uint64_t seed = 0;

  void validate() const {
    if (!(mean_photon_number >= 0.0) || !(mean_photon_number < kMaxMeanPhotonNumber)) {
      throw std::invalid_argument("mean_photon_number must lie in [0, 10)");
    }
    if (!(slot_rate > 0.0) || !std::isfinite(slot_rate)) {
      throw std::invalid_argument("slot_rate must be positive");
    }
    if (!(duration > 0.0) || !std::isfinite(duration)) {
      throw std::invalid_argument("duration must be positive");
    }
  }

  /// floor(duration * slot_rate); throws std::overflow_error past kMaxSlotCount.
  [[nodiscard]] std::uint64_t slot_count() const {
    const long double n = std::floor(static_cast<long double>(duration) * slot_rate);
    if (!(n <= static_cast<long double>(kMaxSlotCount))) {
      throw std::overflow_error("slot count " + std::to_string(static_cast<double>(n)) +
                                " exceeds the supported maximum");
    }
    return static_cast<std::uint64_t>(n);
  }
};

struct PhotonSlot {
  std::uint64_t index = 0;
  std::uint32_t n_photons = 0;
  double global_phase = 0.0;

  friend bool operator==(const PhotonSlot&, const PhotonSlot&) = default;
};

/// Start time of a slot, floor(index / slot_rate) in picoseconds.
inline Picoseconds slot_time(std::uint64_t index, double slot_rate) {
  return static_cast<Picoseconds>(
      std::floor(static_cast<long double>(index) * 1e12L / static_cast<long double>(slot_rate)));
}

/// Poisson sample by sequential inversion of the CDF.
inline std::uint32_t sample_poisson(double mean, CounterRng& rng) {
  if (mean <= 0.0) return 0;
  const double u = rng.uniform();
  double p = std::exp(-mean);
  double cdf = p;
  std::uint32_t k = 0;
  while (u >= cdf && p > 0.0) {
    ++k;
    p *= mean / k;
    cdf += p;
  }
  return k;
}

/// Poisson sample conditioned on k >= 1, by inversion.
inline std::uint32_t sample_positive_poisson(double mean, CounterRng& rng) {
  const double norm = -std::expm1(-mean);  // P(k >= 1)
  const double u = rng.uniform() * norm;
  double p = mean * std::exp(-mean);
  double cdf = p;
  std::uint32_t k = 1;
  while (u >= cdf && p > 0.0) {
    ++k;
    p *= mean / k;
    cdf += p;
  }
  return k;
}

inline double slot_phase(std::uint64_t seed, std::uint64_t index) {
  CounterRng rng(seed, StreamTag::SlotPhase, index);
  return 2.0 * std::numbers::pi * rng.uniform();
}

/// One independent slot draw from a caller-owned stream.
inline PhotonSlot sample_slot(const SourceConfig& config, CounterRng& rng, std::uint64_t index = 0) {
  PhotonSlot slot;
  slot.index = index;
  slot.n_photons = sample_poisson(config.mean_photon_number, rng);
  slot.global_phase = 2.0 * std::numbers::pi * rng.uniform();
  return slot;
}

/// Calls fn(const PhotonSlot&) for every occupied slot of block `block`, in
/// increasing index order.
template <class Fn>
void for_each_occupied_slot_in_block(const SourceConfig& config, std::uint64_t slot_count,
                                     std::uint64_t block, Fn&& fn) {
  const double mean = config.mean_photon_number;
  if (mean <= 0.0) return;
  const std::uint64_t begin = block * kSourceBlockSlots;
  const std::uint64_t end = std::min(slot_count, begin + kSourceBlockSlots);
  if (begin >= end) return;
  CounterRng rng(config.seed, StreamTag::SourceBlock, block);
  std::uint64_t next = begin;
  while (true) {
    // Number of empty slots before the next occupied one is geometric with
    // P(empty) = exp(-mean), i.e. floor(Exp(1) / mean).
    const double gap = std::floor(-std::log(rng.uniform_positive()) / mean);
    if (gap >= static_cast<double>(end - next)) break;
    next += static_cast<std::uint64_t>(gap);
    PhotonSlot slot;
    slot.index = next;
    slot.n_photons = sample_positive_poisson(mean, rng);
    slot.global_phase = slot_phase(config.seed, next);
    fn(slot);
    ++next;
    if (next >= end) break;
  }
}

inline std::uint64_t block_count(std::uint64_t slot_count) {
  return (slot_count + kSourceBlockSlots - 1) / kSourceBlockSlots;
}

template <class Fn>
void for_each_occupied_slot(const SourceConfig& config, Fn&& fn) {
  config.validate();
  const std::uint64_t n = config.slot_count();
  const std::uint64_t blocks = block_count(n);
  for (std::uint64_t b = 0; b < blocks; ++b) for_each_occupied_slot_in_block(config, n, b, fn);
}

/// Every slot, empty ones included. Memory grows with the slot count, so this
/// is meant for short streams; long runs iterate occupied slots instead.
inline std::vector<PhotonSlot> generate_stream(const SourceConfig& config) {
  config.validate();
  const std::uint64_t n = config.slot_count();
  if (n > std::numeric_limits<std::size_t>::max() / sizeof(PhotonSlot)) {
    throw std::overflow_error("slot count does not fit in memory");
  }
  std::vector<PhotonSlot> slots;
  slots.reserve(static_cast<std::size_t>(n));
  auto fill_empty_until = [&](std::uint64_t stop) {
    for (std::uint64_t i = slots.size(); i < stop; ++i) {
      slots.push_back({i, 0, slot_phase(config.seed, i)});
    }
  };
  for_each_occupied_slot(config, [&](const PhotonSlot& s) {
    fill_empty_until(s.index);
    slots.push_back(s);
  });
  fill_empty_until(n);
  return slots;
}

}  // namespace bsbunch
