#pragma once

// Software four-channel coincidence counter: singles, two-fold and
// three-fold coincidences over an acquisition period.
//
// Window semantics: two clicks coincide when |dt| <= window; three clicks
// coincide when max(t) - min(t) <= 2 * window. Each click takes part in at
// most one coincidence per channel, and matches are formed greedily from the
// earliest clicks. On a line this greedy choice is a maximum matching.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsbunch/detector_bank.hpp"
#include "bsbunch/types.hpp"

namespace bsbunch {

struct CcuConfig {
  Picoseconds window = 5'000;  // half-width
  double acquisition = 1.0;    // seconds

  void validate() const {
    if (window <= 0) throw std::invalid_argument("window must be > 0");
    if (!(acquisition > 0.0)) throw std::invalid_argument("acquisition must be > 0");
  }

  [[nodiscard]] Picoseconds acquisition_ps() const {
    return static_cast<Picoseconds>(std::llround(acquisition * 1e12));
  }
};

/// Per-detector click times plus the interval [0, span) they cover.
struct EventStreams {
  std::array<std::vector<Picoseconds>, kDetectorCount> times{};
  Picoseconds span = 0;

  [[nodiscard]] const std::vector<Picoseconds>& of(DetectorId d) const { return times[index_of(d)]; }
  std::vector<Picoseconds>& of(DetectorId d) { return times[index_of(d)]; }

  /// Groups events by detector; the interleaving order of the input is
  /// irrelevant.
  static EventStreams from_events(std::span<const DetectionEvent> events, Picoseconds span) {
    EventStreams s;
    s.span = span;
    for (const auto& e : events) s.of(e.detector).push_back(e.timestamp);
    for (auto& v : s.times) std::sort(v.begin(), v.end());
    return s;
  }

  [[nodiscard]] std::vector<DetectionEvent> merged() const {
    std::vector<DetectionEvent> all;
    for (auto d : kAllDetectors) {
      for (Picoseconds t : of(d)) all.push_back({d, t});
    }
    std::stable_sort(all.begin(), all.end(),
                     [](const DetectionEvent& a, const DetectionEvent& b) { return a.timestamp < b.timestamp; });
    return all;
  }
};

using SinglesCounts = std::array<std::uint64_t, kDetectorCount>;
using PairCounts = std::array<std::uint64_t, kPairCount>;
using TripleCounts = std::array<std::uint64_t, kTripleCount>;

struct TallyTable {
  SinglesCounts singles{};
  PairCounts pairs{};
  TripleCounts triples{};
  double acquisition = 0.0;       // total seconds
  std::uint32_t acquisitions = 0;  // number of summed acquisition periods
  std::map<std::string, std::string> metadata;

  TallyTable& operator+=(const TallyTable& other) {
    for (std::size_t i = 0; i < singles.size(); ++i) singles[i] += other.singles[i];
    for (std::size_t i = 0; i < pairs.size(); ++i) pairs[i] += other.pairs[i];
    for (std::size_t i = 0; i < triples.size(); ++i) triples[i] += other.triples[i];
    acquisition += other.acquisition;
    acquisitions += other.acquisitions;
    return *this;
  }

  [[nodiscard]] std::uint64_t singles_of(DetectorId d) const { return singles[index_of(d)]; }

  [[nodiscard]] bool same_counts(const TallyTable& o) const {
    return singles == o.singles && pairs == o.pairs && triples == o.triples;
  }
};

namespace detail {

inline void require_sorted(std::span<const Picoseconds> v) {
  if (!std::is_sorted(v.begin(), v.end())) {
    throw std::invalid_argument("coincidence counting requires time-ordered streams");
  }
}

inline std::span<const Picoseconds> prefix_before(const std::vector<Picoseconds>& v, Picoseconds end) {
  const auto it = std::lower_bound(v.begin(), v.end(), end);
  return {v.data(), static_cast<std::size_t>(it - v.begin())};
}

}  // namespace detail

/// Greedy earliest-first matching of two sorted streams.
inline std::uint64_t count_pair_matches(std::span<const Picoseconds> a, std::span<const Picoseconds> b,
                                        Picoseconds window) {
  std::uint64_t n = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    const Picoseconds d = a[i] - b[j];
    if (d <= window && d >= -window) {
      ++n;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return n;
}

/// Greedy earliest-first matching of three sorted streams with total
/// spread <= 2 * window. The earliest head is dropped when it cannot be
/// matched with the other two heads, since later partners only lie further
/// away.
inline std::uint64_t count_triple_matches(std::span<const Picoseconds> a, std::span<const Picoseconds> b,
                                          std::span<const Picoseconds> c, Picoseconds window) {
  std::uint64_t n = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t k = 0;
  const Picoseconds spread = 2 * window;
  while (i < a.size() && j < b.size() && k < c.size()) {
    const Picoseconds lo = std::min({a[i], b[j], c[k]});
    const Picoseconds hi = std::max({a[i], b[j], c[k]});
    if (hi - lo <= spread) {
      ++n;
      ++i;
      ++j;
      ++k;
    } else if (a[i] == lo) {
      ++i;
    } else if (b[j] == lo) {
      ++j;
    } else {
      ++k;
    }
  }
  return n;
}

inline SinglesCounts count_singles(const EventStreams& events) {
  SinglesCounts s{};
  for (auto d : kAllDetectors) {
    detail::require_sorted(events.of(d));
    s[index_of(d)] = events.of(d).size();
  }
  return s;
}

inline PairCounts count_pairs(const EventStreams& events, const CcuConfig& cfg) {
  cfg.validate();
  PairCounts out{};
  for (std::size_t p = 0; p < kPairCount; ++p) {
    const auto& pair = kAllPairs[p];
    detail::require_sorted(events.of(pair.first));
    detail::require_sorted(events.of(pair.second));
    out[p] = count_pair_matches(events.of(pair.first), events.of(pair.second), cfg.window);
  }
  return out;
}

inline TripleCounts count_triples(const EventStreams& events, const CcuConfig& cfg) {
  cfg.validate();
  TripleCounts out{};
  for (std::size_t t = 0; t < kTripleCount; ++t) {
    const auto& tr = kAllTriples[t];
    for (auto d : {tr.first, tr.second, tr.third}) detail::require_sorted(events.of(d));
    out[t] = count_triple_matches(events.of(tr.first), events.of(tr.second), events.of(tr.third), cfg.window);
  }
  return out;
}

/// Full tally over [0, acquisition). Clicks at or after the end of the
/// acquisition are ignored; streams must cover the whole period.
inline TallyTable accumulate(const EventStreams& events, const CcuConfig& cfg) {
  cfg.validate();
  const Picoseconds end = cfg.acquisition_ps();
  if (events.span < end) {
    throw std::invalid_argument("event streams cover " + std::to_string(events.span) +
                                " ps, shorter than the acquisition of " + std::to_string(end) + " ps");
  }
  EventStreams window_events;
  window_events.span = end;
  for (auto d : kAllDetectors) {
    const auto& v = events.of(d);
    detail::require_sorted(v);
    const auto head = detail::prefix_before(v, end);
    window_events.of(d).assign(head.begin(), head.end());
  }
  TallyTable t;
  t.singles = count_singles(window_events);
  t.pairs = count_pairs(window_events, cfg);
  t.triples = count_triples(window_events, cfg);
  t.acquisition = cfg.acquisition;
  t.acquisitions = 1;
  return t;
}

}  // namespace bsbunch
