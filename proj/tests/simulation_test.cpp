#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "bsbunch/simulation.hpp"
#include "bsbunch/statistics.hpp"

namespace bsbunch {
namespace {

SimulationConfig small_config(RoutingModel model, double mean = 0.3) {
  SimulationConfig c;
  c.model = model;
  c.mean_photon_number = mean;
  c.slot_rate = 2e6;
  DetectorConfig d;
  d.efficiency = 0.6;
  d.dark_rate = 0.0;
  c.detectors = uniform_bank(d);
  c.ccu = {5'000, 0.5};
  c.seed = 42;
  return c;
}

TEST(Simulation, WorkerCountDoesNotChangeResults) {
  auto c = small_config(RoutingModel::PhaseBasisSuperposition, 0.05);
  c.slot_rate = 7e6;  // several source blocks
  c.detectors[2].dark_rate = 500.0;
  const auto one = simulate_acquisition(c, 9);
  for (unsigned w : {2U, 3U, 8U}) {
    c.workers = w;
    const auto many = simulate_acquisition(c, 9);
    EXPECT_EQ(many.streams.times, one.streams.times) << w << " workers";
    EXPECT_EQ(many.stats.photons, one.stats.photons);
  }
}

TEST(Simulation, StreamsSortedAndWithinAcquisition) {
  auto c = small_config(RoutingModel::ClassicalIndependent);
  c.detectors = uniform_bank(DetectorConfig{});  // default jitter and dead time
  const auto a = simulate_acquisition(c, 1);
  EXPECT_EQ(a.streams.span, c.ccu.acquisition_ps());
  for (const auto& v : a.streams.times) {
    ASSERT_FALSE(v.empty());
    EXPECT_TRUE(std::is_sorted(v.begin(), v.end()));
    EXPECT_GE(v.front(), 0);
    EXPECT_LT(v.back(), a.streams.span);
    for (std::size_t i = 1; i < v.size(); ++i) ASSERT_GE(v[i] - v[i - 1], 22'000);
  }
}

TEST(Simulation, BunchingNeverGivesCrossCoincidences) {
  const auto r = simulate(small_config(RoutingModel::PureBunching));
  for (std::size_t p = 0; p < kPairCount; ++p) {
    if (is_same_side(kAllPairs[p])) {
      EXPECT_GT(r.tally.pairs[p], 1000U);
    } else {
      EXPECT_EQ(r.tally.pairs[p], 0U) << pair_name(kAllPairs[p]);
    }
  }
  for (auto t : r.tally.triples) EXPECT_EQ(t, 0U);
}

TEST(Simulation, ExactRatesAgreeWithMonteCarlo) {
  for (auto m : kAllModels) {
    const auto c = small_config(m);
    const auto r = simulate(c);
    RateInputs in;
    in.model = m;
    in.mean_photon_number = c.mean_photon_number;
    in.slot_rate = c.slot_rate;
    in.efficiency = 0.6;
    in.exact = true;
    const auto p = predicted_rates(in);
    const double t = c.ccu.acquisition;
    for (std::size_t i = 0; i < kDetectorCount; ++i) {
      const double e = p.singles[i] * t;
      EXPECT_LE(std::abs(static_cast<double>(r.tally.singles[i]) - e), 4 * std::sqrt(e)) << model_name(m);
    }
    for (std::size_t i = 0; i < kPairCount; ++i) {
      const double e = p.pairs[i] * t;
      EXPECT_LE(std::abs(static_cast<double>(r.tally.pairs[i]) - e), 4 * std::sqrt(e) + 1e-9) << model_name(m);
    }
    for (std::size_t i = 0; i < kTripleCount; ++i) {
      const double e = p.triples[i] * t;
      EXPECT_LE(std::abs(static_cast<double>(r.tally.triples[i]) - e), 4 * std::sqrt(e) + 1e-9) << model_name(m);
    }
  }
}

TEST(Simulation, FallbackSlotsCountedOnlyForPhaseBasis) {
  const auto pb = simulate(small_config(RoutingModel::PhaseBasisSuperposition));
  EXPECT_GT(pb.stats.fallback_slots, 0U);
  const auto cl = simulate(small_config(RoutingModel::ClassicalIndependent));
  EXPECT_EQ(cl.stats.fallback_slots, 0U);
  EXPECT_EQ(cl.stats.slots, 1'000'000U);
}

TEST(Simulation, ZeroMeanGivesDarkCountsOnly) {
  auto c = small_config(RoutingModel::ClassicalIndependent, 0.0);
  c.detectors = uniform_bank(DetectorConfig{});
  c.ccu.acquisition = 1.0;
  const auto r = simulate(c, 4);
  for (auto s : r.tally.singles) {
    EXPECT_LE(std::abs(static_cast<double>(s) - 108.0), 3 * std::sqrt(108.0));
  }
  EXPECT_EQ(r.stats.photons, 0U);
}

TEST(Simulation, RepeatsAreIndependentAcquisitions) {
  const auto c = small_config(RoutingModel::ClassicalIndependent, 0.05);
  const auto two = simulate(c, 2);
  EXPECT_EQ(two.tally.acquisitions, 2U);
  EXPECT_DOUBLE_EQ(two.tally.acquisition, 1.0);
  const auto a0 = accumulate(simulate_acquisition(c, acquisition_seed(c.seed, 0)).streams, c.ccu);
  const auto a1 = accumulate(simulate_acquisition(c, acquisition_seed(c.seed, 1)).streams, c.ccu);
  EXPECT_FALSE(a0.same_counts(a1));
  TallyTable sum = a0;
  sum += a1;
  EXPECT_TRUE(sum.same_counts(two.tally));
}

TEST(Simulation, RejectsInvalidConfig) {
  auto c = small_config(RoutingModel::ClassicalIndependent);
  c.mean_photon_number = -0.1;
  EXPECT_THROW(simulate_acquisition(c, 0), std::invalid_argument);
  c = small_config(RoutingModel::ClassicalIndependent);
  c.detectors[3].efficiency = 2.0;
  EXPECT_THROW(simulate_acquisition(c, 0), std::invalid_argument);
}

// Routing and detection never read the slot's global phase, so any
// re-phasing of the source leaves every click unchanged.
TEST(ProcessSlot, GlobalPhaseIrrelevant) {
  const auto bank = uniform_bank(DetectorConfig{});
  for (auto m : kAllModels) {
    for (std::uint64_t idx = 0; idx < 2000; ++idx) {
      PhotonSlot s{idx, static_cast<std::uint32_t>(1 + idx % 4), 0.0};
      std::vector<DetectionEvent> ref;
      process_slot(s, m, bank, 7.78e7, 5, [&](DetectorId d, Picoseconds t) { ref.push_back({d, t}); });
      for (double phase : {0.7, std::numbers::pi, 5.9}) {
        s.global_phase = phase;
        std::vector<DetectionEvent> got;
        process_slot(s, m, bank, 7.78e7, 5, [&](DetectorId d, Picoseconds t) { got.push_back({d, t}); });
        ASSERT_EQ(got.size(), ref.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
          EXPECT_EQ(got[i].detector, ref[i].detector);
          EXPECT_EQ(got[i].timestamp, ref[i].timestamp);
        }
      }
    }
  }
}

TEST(ProcessSlot, VacuumProducesNothing) {
  int n = 0;
  process_slot(PhotonSlot{3, 0, 0.0}, RoutingModel::ClassicalIndependent, uniform_bank(DetectorConfig{}), 1e6, 1,
               [&](DetectorId, Picoseconds) { ++n; });
  EXPECT_EQ(n, 0);
}

}  // namespace
}  // namespace bsbunch
