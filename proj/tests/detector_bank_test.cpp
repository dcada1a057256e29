#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "bsbunch/detector_bank.hpp"

namespace bsbunch {
namespace {

DetectorConfig ideal() {
  DetectorConfig c;
  c.efficiency = 1.0;
  c.dead_time = 0;
  c.pulse_width = 0;
  c.dark_rate = 0.0;
  c.timing_jitter_sigma = 0;
  return c;
}

using CountsKey = std::array<std::uint32_t, 4>;

void expect_split_frequencies(PortOccupancy occ, const std::map<CountsKey, double>& expected) {
  constexpr int kN = 400'000;
  CounterRng rng(substream_key(12, StreamTag::Standalone, occ.port1 * 7 + occ.port2));
  std::map<CountsKey, int> freq;
  for (int i = 0; i < kN; ++i) ++freq[split_to_detectors(occ, rng)];
  for (const auto& [k, c] : freq) EXPECT_TRUE(expected.contains(k));
  for (const auto& [k, p] : expected) {
    const double obs = freq.contains(k) ? freq[k] : 0;
    EXPECT_LE(std::abs(obs - kN * p), 3 * std::sqrt(kN * p * (1 - p)) + 1e-9);
  }
}

TEST(Split, BunchedPairOnPortOne) {
  expect_split_frequencies({2, 0}, {{{1, 1, 0, 0}, 0.5}, {{2, 0, 0, 0}, 0.25}, {{0, 2, 0, 0}, 0.25}});
}

TEST(Split, SplitPair) {
  expect_split_frequencies({1, 1}, {{{1, 0, 1, 0}, 0.25},
                                    {{1, 0, 0, 1}, 0.25},
                                    {{0, 1, 1, 0}, 0.25},
                                    {{0, 1, 0, 1}, 0.25}});
}

TEST(Split, EmptyStaysEmpty) {
  CounterRng rng(1);
  EXPECT_EQ(split_to_detectors({0, 0}, rng), (DetectorCounts{0, 0, 0, 0}));
}

TEST(Split, ConservesPhotons) {
  CounterRng rng(8);
  for (std::uint32_t a = 0; a < 20; ++a) {
    for (std::uint32_t b = 0; b < 20; ++b) {
      const auto c = split_to_detectors({a, b}, rng);
      EXPECT_EQ(c[0] + c[1], a);
      EXPECT_EQ(c[2] + c[3], b);
    }
  }
}

TEST(ClickProbability, ClosedForm) {
  EXPECT_NEAR(click_probability(2, 0.59), 0.8319, 1e-12);
  EXPECT_EQ(click_probability(0, 0.59), 0.0);
  EXPECT_NEAR(click_probability(1, 1.0), 1.0, 1e-15);
}

TEST(DetectSlot, IdealSinglePhotonClicks) {
  DetectorBank bank(ideal());
  CounterRng rng(2);
  const auto ev = bank.detect_slot({1, 0, 0, 0}, 1000, rng);
  ASSERT_EQ(ev.size(), 1U);
  EXPECT_EQ(ev[0].detector, DetectorId::APrime);
  EXPECT_EQ(ev[0].timestamp, 1000);
}

TEST(DetectSlot, TwoPhotonClickRateMatchesClosedForm) {
  DetectorConfig c = ideal();
  c.efficiency = 0.59;
  DetectorBank bank(c);
  CounterRng rng(3);
  constexpr int kN = 1'000'000;
  int clicks = 0;
  for (int i = 0; i < kN; ++i) {
    // Slots 1 us apart so dead time (0 here) never interferes.
    clicks += static_cast<int>(bank.detect_slot({2, 0, 0, 0}, Picoseconds{i} * 1'000'000, rng).size());
  }
  const double p = 1 - 0.41 * 0.41;
  EXPECT_LE(std::abs(clicks - kN * p), 3 * std::sqrt(kN * p * (1 - p)));
}

TEST(DetectSlot, AtMostOneClickPerDetector) {
  DetectorBank bank(ideal());
  CounterRng rng(4);
  const auto ev = bank.detect_slot({5, 3, 0, 1}, 0, rng);
  EXPECT_EQ(ev.size(), 3U);
}

TEST(DetectSlot, DeadTimeSuppressesEarlyClick) {
  DetectorConfig c = ideal();
  c.dead_time = 22'000;
  DetectorBank bank(c);
  CounterRng rng(5);
  EXPECT_EQ(bank.detect_slot({1, 0, 0, 0}, 100'000, rng).size(), 1U);
  EXPECT_TRUE(bank.detect_slot({1, 0, 0, 0}, 105'000, rng).empty());
  EXPECT_EQ(bank.detect_slot({1, 0, 0, 0}, 122'000, rng).size(), 1U);
  // Other detectors are unaffected.
  EXPECT_EQ(bank.detect_slot({0, 1, 0, 0}, 123'000, rng).size(), 1U);
}

TEST(DetectSlot, RejectsNegativeSlotTime) {
  DetectorBank bank(ideal());
  CounterRng rng(6);
  EXPECT_THROW(bank.detect_slot({1, 0, 0, 0}, -1, rng), std::invalid_argument);
}

TEST(DeadTime, FilterKeepsStrictOrderAndGaps) {
  std::vector<Picoseconds> v{0, 5, 10, 10, 30, 31, 60, 100, 101};
  apply_dead_time(v, 22);
  EXPECT_EQ(v, (std::vector<Picoseconds>{0, 30, 60, 100}));
  std::vector<Picoseconds> w{1, 1, 2};
  apply_dead_time(w, 0);
  EXPECT_EQ(w, (std::vector<Picoseconds>{1, 2}));
}

TEST(DarkEvents, RateAtMeasuredLevel) {
  DetectorConfig c = ideal();
  c.dark_rate = 27.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto ev = dark_events(c, DetectorId::BPrime, 1.0, seed);
    EXPECT_GE(ev.size(), 27 - 3 * std::sqrt(27.0));
    EXPECT_LE(ev.size(), 27 + 3 * std::sqrt(27.0));
    EXPECT_TRUE(std::is_sorted(ev.begin(), ev.end()));
    for (auto t : ev) {
      EXPECT_GE(t, 0);
      EXPECT_LT(t, kPicosecondsPerSecond);
    }
  }
}

TEST(DarkEvents, LongRunMeanRate) {
  DetectorConfig c = ideal();
  c.dark_rate = 27.0;
  const auto ev = dark_events(c, DetectorId::APrime, 1000.0, 3);
  EXPECT_LE(std::abs(static_cast<double>(ev.size()) - 27000.0), 3 * std::sqrt(27000.0));
}

TEST(DarkEvents, ZeroRateNoEvents) {
  EXPECT_TRUE(dark_events(ideal(), DetectorId::APrime, 10.0, 1).empty());
  EXPECT_TRUE(dark_events(uniform_bank(ideal()), 10.0, 1).empty());
}

TEST(DarkEvents, BankMergeIsTimeOrdered) {
  DetectorConfig c = ideal();
  c.dark_rate = 500.0;
  const auto ev = dark_events(uniform_bank(c), 1.0, 9);
  EXPECT_TRUE(std::is_sorted(ev.begin(), ev.end(),
                             [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; }));
  EXPECT_GT(ev.size(), 1500U);
}

TEST(DetectorConfig, Validation) {
  DetectorConfig c;
  EXPECT_NO_THROW(c.validate());
  c.efficiency = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = DetectorConfig{};
  c.dead_time = 5'000;  // shorter than the 10 ns pulse
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = DetectorConfig{};
  c.dark_rate = -1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace bsbunch
