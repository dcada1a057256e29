#pragma once

// First beam splitter: how a slot's photons divide between output ports 1
// and 2 under three competing models.

#include <array>
#include <bit>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "bsbunch/bs_algebra.hpp"
#include "bsbunch/rng.hpp"

namespace bsbunch {

enum class RoutingModel {
  ClassicalIndependent,
  PhaseBasisSuperposition,
  PureBunching,
};

inline constexpr std::array<RoutingModel, 3> kAllModels{
    RoutingModel::ClassicalIndependent, RoutingModel::PhaseBasisSuperposition,
    RoutingModel::PureBunching};

constexpr std::string_view model_name(RoutingModel m) {
  switch (m) {
    case RoutingModel::ClassicalIndependent: return "classical";
    case RoutingModel::PhaseBasisSuperposition: return "phase-basis";
    case RoutingModel::PureBunching: return "bunching";
  }
  return "?";
}

inline std::optional<RoutingModel> parse_model(std::string_view name) {
  for (auto m : kAllModels) {
    if (model_name(m) == name) return m;
  }
  return std::nullopt;
}

struct PortOccupancy {
  std::uint32_t port1 = 0;
  std::uint32_t port2 = 0;

  [[nodiscard]] constexpr std::uint32_t total() const { return port1 + port2; }
  friend constexpr auto operator<=>(const PortOccupancy&, const PortOccupancy&) = default;
};

using OutcomeDistribution = std::map<PortOccupancy, double>;

inline constexpr std::uint32_t kEnumerationLimit = 12;

/// The phase-basis model only defines photon pairs; larger photon numbers
/// fall back to independent binomial routing.
constexpr bool uses_binomial_fallback(RoutingModel m, std::uint32_t n) {
  return m == RoutingModel::PhaseBasisSuperposition && n >= 3;
}

namespace detail {

/// Converts a two-photon amplitude pair with integer intensities (in I0) to
/// photon counts.
inline PortOccupancy occupancy_from_intensity(const PortAmplitudes& a) {
  const IntensityPair i = intensity(a);
  return {static_cast<std::uint32_t>(std::lround(i.i1)), static_cast<std::uint32_t>(std::lround(i.i2))};
}

/// Output of a photon pair for the bases chosen by photon one and photon two.
/// Equal bases split one photon per port; opposite bases bunch, with the
/// (Plus, Minus) ordering taken as the symmetric sum and (Minus, Plus) as the
/// antisymmetric difference.
inline PortOccupancy pair_outcome(PhaseBasis first, PhaseBasis second) {
  const Complex two_photon = std::sqrt(2.0);
  if (first == second) return occupancy_from_intensity(apply_same_basis(two_photon, first));
  const Combination c = first == PhaseBasis::Plus ? Combination::Symmetric : Combination::Antisymmetric;
  return occupancy_from_intensity(superpose_opposite({Complex(1.0), Complex(0.0)}, c));
}

inline PhaseBasis basis_from_bit(bool bit) { return bit ? PhaseBasis::Minus : PhaseBasis::Plus; }

inline PortOccupancy binomial_route(std::uint32_t n, CounterRng& rng) {
  std::uint32_t port1 = 0;
  std::uint32_t left = n;
  while (left > 0) {
    const std::uint32_t take = left < 64 ? left : 64;
    std::uint64_t bits = rng();
    if (take < 64) bits &= (std::uint64_t{1} << take) - 1;
    port1 += static_cast<std::uint32_t>(std::popcount(bits));
    left -= take;
  }
  return {port1, n - port1};
}

}  // namespace detail

inline PortOccupancy route(RoutingModel model, std::uint32_t n, CounterRng& rng) {
  if (n == 0) return {0, 0};
  switch (model) {
    case RoutingModel::ClassicalIndependent:
      return detail::binomial_route(n, rng);
    case RoutingModel::PureBunching:
      return rng.coin() ? PortOccupancy{n, 0} : PortOccupancy{0, n};
    case RoutingModel::PhaseBasisSuperposition: {
      if (n == 2) {
        const std::uint64_t bits = rng();
        return detail::pair_outcome(detail::basis_from_bit(bits & 1U), detail::basis_from_bit(bits & 2U));
      }
      if (n == 1) {
        // Single photon: port probabilities are the output intensities of
        // the randomly chosen basis.
        const PortAmplitudes out = apply(bs_matrix(detail::basis_from_bit(rng.coin())), {Complex(1.0), Complex(0.0)});
        return rng.uniform() < intensity(out).i1 ? PortOccupancy{1, 0} : PortOccupancy{0, 1};
      }
      return detail::binomial_route(n, rng);
    }
  }
  throw std::logic_error("route: unknown model");
}

/// Exact outcome distribution by exhaustive enumeration of the model's
/// elementary choices.
inline OutcomeDistribution enumerate_distribution(RoutingModel model, std::uint32_t n) {
  if (n > kEnumerationLimit) {
    throw std::out_of_range("enumerate_distribution: n = " + std::to_string(n) +
                            " exceeds the enumeration bound of " + std::to_string(kEnumerationLimit));
  }
  OutcomeDistribution dist;
  if (n == 0) {
    dist[{0, 0}] = 1.0;
    return dist;
  }
  auto enumerate_binomial = [&] {
    const std::uint32_t routings = 1U << n;
    const double w = 1.0 / routings;
    for (std::uint32_t mask = 0; mask < routings; ++mask) {
      std::uint32_t port1 = 0;
      for (std::uint32_t b = 0; b < n; ++b) port1 += (mask >> b) & 1U;
      dist[{port1, n - port1}] += w;
    }
  };
  switch (model) {
    case RoutingModel::ClassicalIndependent:
      enumerate_binomial();
      break;
    case RoutingModel::PureBunching:
      dist[{n, 0}] += 0.5;
      dist[{0, n}] += 0.5;
      break;
    case RoutingModel::PhaseBasisSuperposition:
      if (n == 2) {
        for (auto a : {PhaseBasis::Plus, PhaseBasis::Minus}) {
          for (auto b : {PhaseBasis::Plus, PhaseBasis::Minus}) dist[detail::pair_outcome(a, b)] += 0.25;
        }
      } else if (n == 1) {
        for (auto basis : {PhaseBasis::Plus, PhaseBasis::Minus}) {
          const IntensityPair i = intensity(apply(bs_matrix(basis), {Complex(1.0), Complex(0.0)}));
          dist[{1, 0}] += 0.5 * i.i1;
          dist[{0, 1}] += 0.5 * i.i2;
        }
      } else {
        enumerate_binomial();
      }
      break;
  }
  return dist;
}

}  // namespace bsbunch
