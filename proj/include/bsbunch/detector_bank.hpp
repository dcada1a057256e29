#pragma once

// Four non-number-resolving single-photon counters behind the two
// second-stage beam splitters.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsbunch/rng.hpp"
#include "bsbunch/routing.hpp"
#include "bsbunch/types.hpp"

namespace bsbunch {

struct DetectorConfig {
  double efficiency = 0.586;
  Picoseconds dead_time = 22'000;
  double dark_rate = 27.0;  // counts per second
  Picoseconds pulse_width = 10'000;
  Picoseconds timing_jitter_sigma = 350;

  void validate() const {
    if (!(efficiency >= 0.0 && efficiency <= 1.0)) {
      throw std::invalid_argument("efficiency must lie in [0, 1]");
    }
    if (pulse_width < 0) throw std::invalid_argument("pulse_width must be >= 0");
    if (dead_time < pulse_width) throw std::invalid_argument("dead_time must be >= pulse_width");
    if (!(dark_rate >= 0.0) || !std::isfinite(dark_rate)) {
      throw std::invalid_argument("dark_rate must be >= 0");
    }
    if (timing_jitter_sigma < 0) throw std::invalid_argument("timing_jitter_sigma must be >= 0");
  }

  friend bool operator==(const DetectorConfig&, const DetectorConfig&) = default;
};

using DetectorBankConfig = std::array<DetectorConfig, kDetectorCount>;

inline DetectorBankConfig uniform_bank(const DetectorConfig& cfg) {
  DetectorBankConfig bank;
  bank.fill(cfg);
  return bank;
}

struct DetectionEvent {
  DetectorId detector = DetectorId::APrime;
  Picoseconds timestamp = 0;

  friend bool operator==(const DetectionEvent&, const DetectionEvent&) = default;
};

/// Photons incident on each detector during one slot, indexed by DetectorId.
using DetectorCounts = std::array<std::uint32_t, kDetectorCount>;

/// Second stage: every port-1 photon goes to A' or A'', every port-2 photon
/// to B' or B'', each with probability 1/2.
inline DetectorCounts split_to_detectors(const PortOccupancy& occupancy, CounterRng& rng) {
  DetectorCounts counts{};
  const PortOccupancy a = detail::binomial_route(occupancy.port1, rng);
  const PortOccupancy b = detail::binomial_route(occupancy.port2, rng);
  counts[index_of(DetectorId::APrime)] = a.port1;
  counts[index_of(DetectorId::ADoublePrime)] = a.port2;
  counts[index_of(DetectorId::BPrime)] = b.port1;
  counts[index_of(DetectorId::BDoublePrime)] = b.port2;
  return counts;
}

/// 1 - (1 - efficiency)^k.
inline double click_probability(std::uint32_t k, double efficiency) {
  if (k == 0) return 0.0;
  return -std::expm1(static_cast<double>(k) * std::log1p(-efficiency));
}

/// Clicks a slot produces before dead time is applied. At most one click per
/// detector; timestamps carry Gaussian jitter and may fall before zero.
template <class Sink>
void sample_clicks(const DetectorCounts& counts, Picoseconds slot_start, const DetectorBankConfig& cfg,
                   CounterRng& rng, Sink&& sink) {
  for (auto d : kAllDetectors) {
    const std::uint32_t k = counts[index_of(d)];
    if (k == 0) continue;
    const DetectorConfig& c = cfg[index_of(d)];
    const bool click = c.efficiency >= 1.0 || rng.uniform() < click_probability(k, c.efficiency);
    if (!click) continue;
    Picoseconds t = slot_start;
    if (c.timing_jitter_sigma > 0) {
      std::normal_distribution<double> jitter(0.0, static_cast<double>(c.timing_jitter_sigma));
      t += static_cast<Picoseconds>(std::llround(jitter(rng)));
    }
    sink(d, t);
  }
}

/// Drops events closer than dead_time to the previous registered event
/// (non-paralyzable). Input must be sorted; output is strictly increasing.
inline void apply_dead_time(std::vector<Picoseconds>& sorted, Picoseconds dead_time,
                            std::optional<Picoseconds> last_click = std::nullopt) {
  auto out = sorted.begin();
  for (auto it = sorted.begin(); it != sorted.end(); ++it) {
    if (last_click && (*it <= *last_click || *it - *last_click < dead_time)) continue;
    last_click = *it;
    *out++ = *it;
  }
  sorted.erase(out, sorted.end());
}

/// Homogeneous Poisson dark clicks on one detector over [0, duration).
inline std::vector<Picoseconds> dark_events(const DetectorConfig& cfg, DetectorId detector, double duration,
                                            std::uint64_t seed) {
  std::vector<Picoseconds> out;
  if (cfg.dark_rate <= 0.0) return out;
  CounterRng rng(seed, StreamTag::DarkCounts, index_of(detector));
  std::exponential_distribution<double> gap(cfg.dark_rate);
  const double end = duration;
  double t = 0.0;
  while (true) {
    t += gap(rng);
    if (t >= end) break;
    out.push_back(static_cast<Picoseconds>(std::floor(t * 1e12)));
  }
  return out;
}

/// Dark clicks of the whole bank, merged in time order.
inline std::vector<DetectionEvent> dark_events(const DetectorBankConfig& cfg, double duration, std::uint64_t seed) {
  std::vector<DetectionEvent> all;
  for (auto d : kAllDetectors) {
    for (Picoseconds t : dark_events(cfg[index_of(d)], d, duration, seed)) all.push_back({d, t});
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const DetectionEvent& a, const DetectionEvent& b) { return a.timestamp < b.timestamp; });
  return all;
}

/// Slot-by-slot detector model with per-detector dead-time state.
class DetectorBank {
 public:
  explicit DetectorBank(DetectorBankConfig cfg) : cfg_(cfg) {
    for (const auto& c : cfg_) c.validate();
  }
  explicit DetectorBank(const DetectorConfig& cfg) : DetectorBank(uniform_bank(cfg)) {}

  [[nodiscard]] const DetectorBankConfig& config() const { return cfg_; }
  [[nodiscard]] std::optional<Picoseconds> last_click(DetectorId d) const { return last_[index_of(d)]; }

  /// Registers a click if the detector is live; returns whether it counted.
  bool register_click(DetectorId d, Picoseconds t) {
    auto& last = last_[index_of(d)];
    if (t < 0) return false;
    if (last && (t <= *last || t - *last < cfg_[index_of(d)].dead_time)) return false;
    last = t;
    return true;
  }

  std::vector<DetectionEvent> detect_slot(const DetectorCounts& counts, Picoseconds slot_start, CounterRng& rng) {
    if (slot_start < 0) throw std::invalid_argument("detect_slot: slot_start must be >= 0");
    std::vector<DetectionEvent> events;
    sample_clicks(counts, slot_start, cfg_, rng, [&](DetectorId d, Picoseconds t) {
      if (register_click(d, t)) events.push_back({d, t});
    });
    return events;
  }

 private:
  DetectorBankConfig cfg_;
  std::array<std::optional<Picoseconds>, kDetectorCount> last_{};
};

}  // namespace bsbunch
