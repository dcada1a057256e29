#pragma once

// End-to-end event generation: source -> first beam splitter -> second-stage
// splitters -> detectors, sharded over worker threads by source block.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

#include "bsbunch/coincidence.hpp"
#include "bsbunch/detector_bank.hpp"
#include "bsbunch/photon_source.hpp"
#include "bsbunch/rng.hpp"
#include "bsbunch/routing.hpp"

namespace bsbunch {

struct SimulationConfig {
  RoutingModel model = RoutingModel::PhaseBasisSuperposition;
  double mean_photon_number = 0.022;
  double slot_rate = 7.78e7;
  DetectorBankConfig detectors = uniform_bank(DetectorConfig{});
  CcuConfig ccu{};
  std::uint64_t seed = 0;
  unsigned workers = 1;

  [[nodiscard]] SourceConfig source(std::uint64_t acquisition_seed) const {
    return {mean_photon_number, slot_rate, ccu.acquisition, acquisition_seed};
  }
};

struct AcquisitionStats {
  std::uint64_t slots = 0;
  std::uint64_t occupied_slots = 0;
  std::uint64_t photons = 0;
  std::uint64_t fallback_slots = 0;  // slots routed by the binomial fallback
  std::uint64_t dark_clicks = 0;     // before dead time

  AcquisitionStats& operator+=(const AcquisitionStats& o) {
    slots += o.slots;
    occupied_slots += o.occupied_slots;
    photons += o.photons;
    fallback_slots += o.fallback_slots;
    dark_clicks += o.dark_clicks;
    return *this;
  }
};

struct Acquisition {
  EventStreams streams;
  AcquisitionStats stats;
};

/// Click candidates produced by one slot. All randomness is keyed by
/// (seed, slot index); the slot's global phase plays no part in routing.
template <class Sink>
void process_slot(const PhotonSlot& slot, RoutingModel model, const DetectorBankConfig& detectors, double slot_rate,
                  std::uint64_t seed, Sink&& sink) {
  if (slot.n_photons == 0) return;
  CounterRng rng(seed, StreamTag::SlotRouting, slot.index);
  const PortOccupancy occ = route(model, slot.n_photons, rng);
  const DetectorCounts counts = split_to_detectors(occ, rng);
  sample_clicks(counts, slot_time(slot.index, slot_rate), detectors, rng, sink);
}

/// Sorts, clips to [0, end) and applies dead time to raw per-detector clicks.
inline void finalize_streams(EventStreams& streams, const DetectorBankConfig& detectors, Picoseconds end) {
  for (auto d : kAllDetectors) {
    auto& v = streams.of(d);
    std::sort(v.begin(), v.end());
    const auto first = std::lower_bound(v.begin(), v.end(), Picoseconds{0});
    const auto last = std::lower_bound(first, v.end(), end);
    v.erase(last, v.end());
    v.erase(v.begin(), first);
    apply_dead_time(v, detectors[index_of(d)].dead_time);
  }
  streams.span = end;
}

inline Acquisition simulate_acquisition(const SimulationConfig& cfg, std::uint64_t acquisition_seed) {
  cfg.ccu.validate();
  for (const auto& d : cfg.detectors) d.validate();
  const SourceConfig source = cfg.source(acquisition_seed);
  source.validate();
  const std::uint64_t slots = source.slot_count();
  const std::uint64_t blocks = block_count(slots);
  const auto workers = static_cast<unsigned>(
      std::clamp<std::uint64_t>(cfg.workers == 0 ? 1 : cfg.workers, 1, std::max<std::uint64_t>(blocks, 1)));

  struct Shard {
    EventStreams raw;
    AcquisitionStats stats;
  };
  std::vector<Shard> shards(workers);
  std::vector<std::exception_ptr> errors(workers);

  auto run_shard = [&](unsigned w) {
    try {
      Shard& shard = shards[w];
      const std::uint64_t first = blocks * w / workers;
      const std::uint64_t last = blocks * (w + 1) / workers;
      for (std::uint64_t b = first; b < last; ++b) {
        for_each_occupied_slot_in_block(source, slots, b, [&](const PhotonSlot& slot) {
          ++shard.stats.occupied_slots;
          shard.stats.photons += slot.n_photons;
          if (uses_binomial_fallback(cfg.model, slot.n_photons)) ++shard.stats.fallback_slots;
          process_slot(slot, cfg.model, cfg.detectors, cfg.slot_rate, acquisition_seed,
                       [&](DetectorId d, Picoseconds t) { shard.raw.of(d).push_back(t); });
        });
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };

  if (workers == 1) {
    run_shard(0);
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(run_shard, w);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  Acquisition acq;
  acq.stats.slots = slots;
  for (auto& shard : shards) {
    acq.stats += shard.stats;
    for (auto d : kAllDetectors) {
      auto& dst = acq.streams.of(d);
      auto& src = shard.raw.of(d);
      dst.insert(dst.end(), src.begin(), src.end());
      src = {};
    }
  }
  for (auto d : kAllDetectors) {
    auto dark = dark_events(cfg.detectors[index_of(d)], d, cfg.ccu.acquisition, acquisition_seed);
    acq.stats.dark_clicks += dark.size();
    auto& dst = acq.streams.of(d);
    dst.insert(dst.end(), dark.begin(), dark.end());
  }
  finalize_streams(acq.streams, cfg.detectors, cfg.ccu.acquisition_ps());
  return acq;
}

struct SimulationResult {
  TallyTable tally;
  AcquisitionStats stats;
};

/// Sums `repeats` independent acquisitions; the k-th uses acquisition_seed(seed, k).
template <class Progress>
SimulationResult simulate(const SimulationConfig& cfg, unsigned repeats, Progress&& progress) {
  SimulationResult res;
  for (unsigned k = 0; k < std::max(repeats, 1U); ++k) {
    const Acquisition acq = simulate_acquisition(cfg, acquisition_seed(cfg.seed, k));
    res.tally += accumulate(acq.streams, cfg.ccu);
    res.stats += acq.stats;
    progress(k + 1, std::max(repeats, 1U));
  }
  return res;
}

inline SimulationResult simulate(const SimulationConfig& cfg, unsigned repeats = 1) {
  return simulate(cfg, repeats, [](unsigned, unsigned) {});
}

}  // namespace bsbunch
