#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace bsbunch {

/// Timestamps and durations are integer picoseconds everywhere.
using Picoseconds = std::int64_t;

inline constexpr Picoseconds kPicosecondsPerSecond = 1'000'000'000'000;

/// The four detectors behind the two second-stage beam splitters.
/// A-side detectors watch output port 1, B-side detectors watch port 2.
enum class DetectorId : std::uint8_t {
  APrime = 0,
  ADoublePrime = 1,
  BPrime = 2,
  BDoublePrime = 3,
};

inline constexpr std::size_t kDetectorCount = 4;

inline constexpr std::array<DetectorId, kDetectorCount> kAllDetectors{
    DetectorId::APrime, DetectorId::ADoublePrime, DetectorId::BPrime,
    DetectorId::BDoublePrime};

constexpr std::size_t index_of(DetectorId d) { return static_cast<std::size_t>(d); }

constexpr bool is_a_side(DetectorId d) {
  return d == DetectorId::APrime || d == DetectorId::ADoublePrime;
}

/// ASCII token used in file formats and counter names.
constexpr std::string_view token(DetectorId d) {
  switch (d) {
    case DetectorId::APrime: return "A1";
    case DetectorId::ADoublePrime: return "A2";
    case DetectorId::BPrime: return "B1";
    case DetectorId::BDoublePrime: return "B2";
  }
  return "?";
}

/// Human-readable label with primes (A', A'', B', B'').
constexpr std::string_view label(DetectorId d) {
  switch (d) {
    case DetectorId::APrime: return "A'";
    case DetectorId::ADoublePrime: return "A''";
    case DetectorId::BPrime: return "B'";
    case DetectorId::BDoublePrime: return "B''";
  }
  return "?";
}

inline std::optional<DetectorId> detector_from_token(std::string_view t) {
  for (auto d : kAllDetectors) {
    if (token(d) == t) return d;
  }
  return std::nullopt;
}

struct DetectorPair {
  DetectorId first;
  DetectorId second;
  bool reported_in_reference;
};

struct DetectorTriple {
  DetectorId first;
  DetectorId second;
  DetectorId third;
};

inline constexpr std::size_t kPairCount = 6;
inline constexpr std::size_t kTripleCount = 4;

// The first four pairs are the ones the reference measurement table lists.
inline constexpr std::array<DetectorPair, kPairCount> kAllPairs{{
    {DetectorId::APrime, DetectorId::ADoublePrime, true},
    {DetectorId::BPrime, DetectorId::BDoublePrime, true},
    {DetectorId::APrime, DetectorId::BPrime, true},
    {DetectorId::APrime, DetectorId::BDoublePrime, true},
    {DetectorId::ADoublePrime, DetectorId::BPrime, false},
    {DetectorId::ADoublePrime, DetectorId::BDoublePrime, false},
}};

inline constexpr std::array<DetectorTriple, kTripleCount> kAllTriples{{
    {DetectorId::APrime, DetectorId::ADoublePrime, DetectorId::BPrime},
    {DetectorId::APrime, DetectorId::ADoublePrime, DetectorId::BDoublePrime},
    {DetectorId::APrime, DetectorId::BPrime, DetectorId::BDoublePrime},
    {DetectorId::ADoublePrime, DetectorId::BPrime, DetectorId::BDoublePrime},
}};

/// Both detectors of the pair sit behind the same first-stage output port.
constexpr bool is_same_side(const DetectorPair& p) {
  return is_a_side(p.first) == is_a_side(p.second);
}

inline std::string singles_name(DetectorId d) {
  return "singles_" + std::string(token(d));
}

inline std::string pair_name(const DetectorPair& p) {
  return "pair_" + std::string(token(p.first)) + "_" + std::string(token(p.second));
}

inline std::string triple_name(const DetectorTriple& t) {
  return "triple_" + std::string(token(t.first)) + "_" + std::string(token(t.second)) +
         "_" + std::string(token(t.third));
}

}  // namespace bsbunch
