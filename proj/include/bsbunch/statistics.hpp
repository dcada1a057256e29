#pragma once

// Closed-form rate predictions, calibration against the reference
// measurement table, window-based g2(0) and bunching estimators, and the
// photon-number scaling fit.
//
// All detector-level probabilities come from enumeration: the first beam
// splitter's outcome distribution is composed with every second-stage
// routing of every photon. Nothing here hand-codes a pair or triple
// probability.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>

#include "bsbunch/coincidence.hpp"
#include "bsbunch/detector_bank.hpp"
#include "bsbunch/routing.hpp"
#include "bsbunch/types.hpp"

namespace bsbunch {

using DetectorOutcomeDistribution = std::map<DetectorCounts, double>;

/// Distribution of photons over the four detectors for n photons in a slot.
inline DetectorOutcomeDistribution enumerate_detector_distribution(RoutingModel model, std::uint32_t n) {
  DetectorOutcomeDistribution out;
  for (const auto& [occ, p] : enumerate_distribution(model, n)) {
    const std::uint32_t a_routings = 1U << occ.port1;
    const std::uint32_t b_routings = 1U << occ.port2;
    const double w = p / (static_cast<double>(a_routings) * b_routings);
    for (std::uint32_t ma = 0; ma < a_routings; ++ma) {
      const auto a1 = static_cast<std::uint32_t>(std::popcount(ma));
      for (std::uint32_t mb = 0; mb < b_routings; ++mb) {
        const auto b1 = static_cast<std::uint32_t>(std::popcount(mb));
        out[{a1, occ.port1 - a1, b1, occ.port2 - b1}] += w;
      }
    }
  }
  return out;
}

/// Probability that every listed detector receives at least one photon.
inline double occupied_probability(const DetectorOutcomeDistribution& dist, std::span<const DetectorId> set) {
  double total = 0.0;
  for (const auto& [counts, p] : dist) {
    const bool all = std::all_of(set.begin(), set.end(), [&](DetectorId d) { return counts[index_of(d)] > 0; });
    if (all) total += p;
  }
  return total;
}

/// Probability that every listed detector clicks, given efficiency.
inline double click_set_probability(const DetectorOutcomeDistribution& dist, std::span<const DetectorId> set,
                                    double efficiency) {
  double total = 0.0;
  for (const auto& [counts, p] : dist) {
    double q = p;
    for (auto d : set) q *= click_probability(counts[index_of(d)], efficiency);
    total += q;
  }
  return total;
}

struct RateInputs {
  RoutingModel model = RoutingModel::PhaseBasisSuperposition;
  double mean_photon_number = 0.022;
  double slot_rate = 7.78e7;
  double efficiency = 0.586;
  std::array<double, kDetectorCount> dark_rate{};
  Picoseconds window = 0;     // 0 disables the accidental-coincidence term
  Picoseconds dead_time = 0;  // 0 disables the live-time correction
  bool exact = false;         // Poisson sum over n <= kEnumerationLimit
};

struct RatePrediction {
  std::array<double, kDetectorCount> singles{};
  std::array<double, kPairCount> pairs{};
  std::array<double, kTripleCount> triples{};
  std::vector<std::string> warnings;
};

namespace detail {

inline std::array<DetectorId, 2> members(const DetectorPair& p) { return {p.first, p.second}; }
inline std::array<DetectorId, 3> members(const DetectorTriple& t) { return {t.first, t.second, t.third}; }

inline double poisson_pmf(double mean, std::uint32_t n) {
  return std::exp(-mean + n * std::log(mean) - std::lgamma(n + 1.0));
}

}  // namespace detail

inline RatePrediction predicted_rates(const RateInputs& in) {
  RatePrediction out;
  const double mu = in.mean_photon_number;
  const double r = in.slot_rate;
  const double eta = in.efficiency;
  if (mu > 0.1) {
    out.warnings.push_back("mean photon number " + std::to_string(mu) +
                           " is not << 1; leading-order rates lose accuracy");
  }
  std::array<double, kDetectorCount> photon_singles{};

  if (mu > 0.0) {
    if (!in.exact) {
      const auto d1 = enumerate_detector_distribution(in.model, 1);
      const auto d2 = enumerate_detector_distribution(in.model, 2);
      const auto d3 = enumerate_detector_distribution(in.model, 3);
      for (auto d : kAllDetectors) {
        const std::array<DetectorId, 1> set{d};
        photon_singles[index_of(d)] = r * mu * eta * occupied_probability(d1, set);
      }
      for (std::size_t p = 0; p < kPairCount; ++p) {
        out.pairs[p] = r * (mu * mu / 2.0) * eta * eta * occupied_probability(d2, detail::members(kAllPairs[p]));
      }
      for (std::size_t t = 0; t < kTripleCount; ++t) {
        out.triples[t] =
            r * (mu * mu * mu / 6.0) * eta * eta * eta * occupied_probability(d3, detail::members(kAllTriples[t]));
      }
    } else {
      double covered = 0.0;
      for (std::uint32_t n = 1; n <= kEnumerationLimit; ++n) {
        const double pn = detail::poisson_pmf(mu, n);
        covered += pn;
        const auto dist = enumerate_detector_distribution(in.model, n);
        for (auto d : kAllDetectors) {
          const std::array<DetectorId, 1> set{d};
          photon_singles[index_of(d)] += r * pn * click_set_probability(dist, set, eta);
        }
        for (std::size_t p = 0; p < kPairCount; ++p) {
          out.pairs[p] += r * pn * click_set_probability(dist, detail::members(kAllPairs[p]), eta);
        }
        for (std::size_t t = 0; t < kTripleCount; ++t) {
          out.triples[t] += r * pn * click_set_probability(dist, detail::members(kAllTriples[t]), eta);
        }
      }
      const double tail = 1.0 - std::exp(-mu) - covered;
      if (tail > 1e-12) {
        out.warnings.push_back("Poisson tail beyond n = " + std::to_string(kEnumerationLimit) + " is " +
                               std::to_string(tail));
      }
    }
  }

  std::array<double, kDetectorCount> total{};
  for (std::size_t d = 0; d < kDetectorCount; ++d) total[d] = photon_singles[d] + in.dark_rate[d];

  if (in.window > 0) {
    // Accidentals: any click pair within the window, minus the photon-photon
    // share already counted as same-slot coincidences. Photon clicks from
    // different slots only meet when the window spans more than one slot.
    const double w2 = 2.0 * static_cast<double>(in.window) * 1e-12;
    const double slot = 1.0 / r;
    for (std::size_t p = 0; p < kPairCount; ++p) {
      const std::size_t x = index_of(kAllPairs[p].first);
      const std::size_t y = index_of(kAllPairs[p].second);
      const double photon_photon = photon_singles[x] * photon_singles[y];
      out.pairs[p] += w2 * (total[x] * total[y] - photon_photon) + std::max(0.0, w2 - slot) * photon_photon;
    }
  }

  if (in.dead_time > 0) {
    // Non-paralyzable live fraction 1 / (1 + rate * dead_time).
    std::array<double, kDetectorCount> live{};
    const double tau = static_cast<double>(in.dead_time) * 1e-12;
    for (std::size_t d = 0; d < kDetectorCount; ++d) live[d] = 1.0 / (1.0 + total[d] * tau);
    for (std::size_t p = 0; p < kPairCount; ++p) {
      out.pairs[p] *= live[index_of(kAllPairs[p].first)] * live[index_of(kAllPairs[p].second)];
    }
    for (std::size_t t = 0; t < kTripleCount; ++t) {
      for (auto d : detail::members(kAllTriples[t])) out.triples[t] *= live[index_of(d)];
    }
    for (std::size_t d = 0; d < kDetectorCount; ++d) total[d] *= live[d];
  }
  out.singles = total;
  return out;
}

/// Measured rates (per second) to calibrate against. Missing counters are
/// left empty.
struct CalibrationTargets {
  double mean_photon_number = 0.0;
  std::array<std::optional<double>, kDetectorCount> singles{};
  std::array<std::optional<double>, kPairCount> pairs{};
  std::array<std::optional<double>, kTripleCount> triples{};
};

/// Reference blocks: 1 s acquisitions at <n> = 0.022 (block 1) and 0.044
/// (block 2). Only four of the six pairs were reported.
inline CalibrationTargets reference_block(int block) {
  CalibrationTargets t;
  if (block == 1) {
    t.mean_photon_number = 0.022;
    t.singles = {250877.8, 250259.1, 250441.5, 250316.4};
    t.pairs = {808.72, 803.51, 798.81, 800.58, std::nullopt, std::nullopt};
    t.triples = {2.69, 2.25, 2.18, 2.1};
  } else if (block == 2) {
    t.mean_photon_number = 0.044;
    t.singles = {508592.1, 507361.8, 502778.7, 504008.3};
    t.pairs = {3440.36, 3497.19, 3483.59, 3478.35, std::nullopt, std::nullopt};
    t.triples = {16.17, 16.13, 16.53, 16.36};
  } else {
    throw std::out_of_range("reference_block: block must be 1 or 2");
  }
  return t;
}

struct CalibrationResult {
  double slot_rate = 0.0;
  double efficiency = 0.0;
  std::string fitted_singles;  // counter names used for the fit
  std::string fitted_pair;
  std::map<std::string, double> residuals;  // (predicted - observed) / observed
};

/// Fits efficiency from the pair/singles ratio and slot rate from the
/// singles rate, using the first available singles and pair counters.
/// Residuals cover every other available counter.
inline CalibrationResult calibrate(const CalibrationTargets& targets,
                                   RoutingModel model = RoutingModel::ClassicalIndependent) {
  const double mu = targets.mean_photon_number;
  if (!(mu > 0.0)) throw std::invalid_argument("calibrate: mean photon number must be > 0");
  std::optional<std::size_t> si;
  std::optional<std::size_t> pi;
  for (std::size_t i = 0; i < kDetectorCount && !si; ++i) {
    if (targets.singles[i]) si = i;
  }
  for (std::size_t i = 0; i < kPairCount && !pi; ++i) {
    if (targets.pairs[i]) pi = i;
  }
  if (!si || !pi) throw std::invalid_argument("calibrate: need at least one singles and one pair counter");
  const double singles = *targets.singles[*si];
  const double pair = *targets.pairs[*pi];
  if (!(singles > 0.0) || !(pair >= 0.0)) throw std::invalid_argument("calibrate: counters must be positive");

  const auto d1 = enumerate_detector_distribution(model, 1);
  const auto d2 = enumerate_detector_distribution(model, 2);
  const std::array<DetectorId, 1> sdet{kAllDetectors[*si]};
  const double p1 = occupied_probability(d1, sdet);
  const double p2 = occupied_probability(d2, detail::members(kAllPairs[*pi]));
  if (p2 <= 0.0) {
    throw std::domain_error("calibrate: model " + std::string(model_name(model)) +
                            " never produces the fitted pair");
  }
  // pair / singles = mu * eta * p2 / (2 * p1);  singles = R * mu * eta * p1.
  const double eta = 2.0 * p1 * (pair / singles) / (mu * p2);
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw std::domain_error("calibrate: inconsistent targets, fitted efficiency " + std::to_string(eta) +
                            " lies outside [0, 1]");
  }
  CalibrationResult res;
  res.efficiency = eta;
  res.slot_rate = singles / (mu * eta * p1);
  res.fitted_singles = singles_name(kAllDetectors[*si]);
  res.fitted_pair = pair_name(kAllPairs[*pi]);

  RateInputs in;
  in.model = model;
  in.mean_photon_number = mu;
  in.slot_rate = res.slot_rate;
  in.efficiency = eta;
  const RatePrediction pred = predicted_rates(in);
  auto residual = [](double predicted, double observed) { return (predicted - observed) / observed; };
  for (std::size_t i = 0; i < kDetectorCount; ++i) {
    if (targets.singles[i] && *targets.singles[i] > 0.0) {
      res.residuals[singles_name(kAllDetectors[i])] = residual(pred.singles[i], *targets.singles[i]);
    }
  }
  for (std::size_t i = 0; i < kPairCount; ++i) {
    if (targets.pairs[i] && *targets.pairs[i] > 0.0) {
      res.residuals[pair_name(kAllPairs[i])] = residual(pred.pairs[i], *targets.pairs[i]);
    }
  }
  for (std::size_t i = 0; i < kTripleCount; ++i) {
    if (targets.triples[i] && *targets.triples[i] > 0.0) {
      res.residuals[triple_name(kAllTriples[i])] = residual(pred.triples[i], *targets.triples[i]);
    }
  }
  return res;
}

struct CorrelationResult {
  std::optional<double> g2_cross;           // A side (A' + A'') vs B side (B' + B'')
  std::optional<double> g2_same;            // within-side pairs A'A'' and B'B''
  std::optional<double> bunching_fraction;  // share of photon pairs leaving one port
};

/// Window-based g2(0) from singles and pair rates (per second).
///
/// The number of independent coincidence opportunities per second is
/// 1 / max(2 * window, slot duration). The bunching fraction weights each
/// same-side pair by 2: a pair bunched into one port reaches two different
/// detectors only half of the time, while a split pair always does.
inline CorrelationResult correlation_from_rates(std::span<const double, kDetectorCount> singles,
                                                std::span<const double, kPairCount> pairs, double slot_rate,
                                                Picoseconds window) {
  CorrelationResult res;
  const double resolution = std::max(2.0 * static_cast<double>(window) * 1e-12, 1.0 / slot_rate);
  auto s = [&](DetectorId d) { return singles[index_of(d)]; };
  const double a = s(DetectorId::APrime) + s(DetectorId::ADoublePrime);
  const double b = s(DetectorId::BPrime) + s(DetectorId::BDoublePrime);
  double cross = 0.0;
  double same = 0.0;
  double same_norm = 0.0;
  for (std::size_t p = 0; p < kPairCount; ++p) {
    if (is_same_side(kAllPairs[p])) {
      same += pairs[p];
      same_norm += s(kAllPairs[p].first) * s(kAllPairs[p].second);
    } else {
      cross += pairs[p];
    }
  }
  if (a > 0.0 && b > 0.0) res.g2_cross = cross / (a * b * resolution);
  if (same_norm > 0.0) res.g2_same = same / (same_norm * resolution);
  if (2.0 * same + cross > 0.0) res.bunching_fraction = 2.0 * same / (2.0 * same + cross);
  return res;
}

inline CorrelationResult g2_zero(const TallyTable& tally, double slot_rate, const CcuConfig& cfg) {
  if (!(tally.acquisition > 0.0)) throw std::invalid_argument("g2_zero: tally has no acquisition time");
  std::array<double, kDetectorCount> s{};
  std::array<double, kPairCount> p{};
  for (std::size_t i = 0; i < kDetectorCount; ++i) s[i] = static_cast<double>(tally.singles[i]) / tally.acquisition;
  for (std::size_t i = 0; i < kPairCount; ++i) p[i] = static_cast<double>(tally.pairs[i]) / tally.acquisition;
  return correlation_from_rates(s, p, slot_rate, cfg.window);
}

inline CorrelationResult g2_zero(const RatePrediction& pred, double slot_rate, const CcuConfig& cfg) {
  return correlation_from_rates(pred.singles, pred.pairs, slot_rate, cfg.window);
}

struct ScalingClass {
  std::optional<double> ratio;
  std::optional<double> exponent;
  std::size_t counters_used = 0;
};

struct ScalingFit {
  ScalingClass singles;
  ScalingClass pairs;
  ScalingClass triples;
};

inline constexpr std::uint64_t kMinScalingCounts = 10;

/// Rate ratio high/low per counter class (summed over counters with at
/// least kMinScalingCounts in both tallies) and its exponent in the ratio
/// of mean photon numbers.
inline ScalingFit scaling_check(const TallyTable& low, const TallyTable& high, double mean_ratio = 2.0) {
  if (!(low.acquisition > 0.0) || !(high.acquisition > 0.0)) {
    throw std::invalid_argument("scaling_check: tallies need a positive acquisition time");
  }
  if (!(mean_ratio > 0.0) || mean_ratio == 1.0) throw std::invalid_argument("scaling_check: bad mean ratio");
  auto fit = [&](std::span<const std::uint64_t> lo, std::span<const std::uint64_t> hi) {
    ScalingClass c;
    double sl = 0.0;
    double sh = 0.0;
    for (std::size_t i = 0; i < lo.size(); ++i) {
      if (lo[i] < kMinScalingCounts || hi[i] < kMinScalingCounts) continue;
      sl += static_cast<double>(lo[i]);
      sh += static_cast<double>(hi[i]);
      ++c.counters_used;
    }
    if (c.counters_used > 0) {
      c.ratio = (sh / high.acquisition) / (sl / low.acquisition);
      c.exponent = std::log(*c.ratio) / std::log(mean_ratio);
    }
    return c;
  };
  ScalingFit f;
  f.singles = fit(low.singles, high.singles);
  f.pairs = fit(low.pairs, high.pairs);
  f.triples = fit(low.triples, high.triples);
  return f;
}

/// Chi-square goodness of fit of counts to a common mean; returns the
/// upper-tail p-value with counts.size() - 1 degrees of freedom.
inline double chi_square_equal_pvalue(std::span<const double> counts) {
  if (counts.size() < 2) throw std::invalid_argument("chi_square_equal_pvalue: need >= 2 counters");
  double mean = 0.0;
  for (double c : counts) mean += c;
  mean /= static_cast<double>(counts.size());
  if (mean <= 0.0) return 1.0;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - mean) * (c - mean) / mean;
  const boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, chi2));
}

/// P(X >= observed) for X ~ Poisson(expected).
inline double poisson_upper_tail(double expected, std::uint64_t observed) {
  if (observed == 0) return 1.0;
  if (expected <= 0.0) return 0.0;
  const boost::math::poisson_distribution<double> dist(expected);
  return boost::math::cdf(boost::math::complement(dist, static_cast<double>(observed - 1)));
}

}  // namespace bsbunch
