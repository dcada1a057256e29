#pragma once

// Event dump formats.
//
//   text:   one click per line, "<detector> <timestamp_ps>", detector one of
//           A1 A2 B1 B2 (A', A'', B', B''). Blank lines and '#' comments are
//           skipped.
//   binary: 9-byte records, detector index (uint8, 0..3) followed by the
//           timestamp as little-endian uint64 picoseconds. No header.
//
// Writers emit clicks merged in time order, so every detector's clicks are
// time-sorted. Readers reject files where a detector goes back in time.

#include <array>
#include <charconv>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsbunch/coincidence.hpp"

namespace bsbunch {

enum class EventFormat { Text, Binary };

namespace detail {

inline void check_order(std::array<std::optional<Picoseconds>, kDetectorCount>& last, const DetectionEvent& e,
                        std::size_t record) {
  auto& l = last[index_of(e.detector)];
  if (l && e.timestamp < *l) {
    throw std::runtime_error("event record " + std::to_string(record) + ": detector " +
                             std::string(token(e.detector)) + " is not time-sorted");
  }
  l = e.timestamp;
}

inline std::optional<Picoseconds> parse_timestamp(const std::string& s) {
  Picoseconds v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || v < 0) return std::nullopt;
  return v;
}

}  // namespace detail

inline void write_events(std::ostream& out, const EventStreams& streams, EventFormat format) {
  const auto events = streams.merged();
  if (format == EventFormat::Text) {
    for (const auto& e : events) out << token(e.detector) << ' ' << e.timestamp << '\n';
    return;
  }
  std::array<char, 9> rec{};
  for (const auto& e : events) {
    rec[0] = static_cast<char>(index_of(e.detector));
    const auto t = static_cast<std::uint64_t>(e.timestamp);
    for (int b = 0; b < 8; ++b) rec[1 + b] = static_cast<char>((t >> (8 * b)) & 0xFFU);
    out.write(rec.data(), rec.size());
  }
}

inline std::vector<DetectionEvent> read_events(std::istream& in, EventFormat format) {
  std::vector<DetectionEvent> events;
  std::array<std::optional<Picoseconds>, kDetectorCount> last{};
  if (format == EventFormat::Text) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      std::string tok;
      if (!(ls >> tok)) continue;
      std::string ts;
      std::string extra;
      const auto det = detector_from_token(tok);
      const auto t = (ls >> ts) ? detail::parse_timestamp(ts) : std::nullopt;
      if (!det || !t || (ls >> extra)) {
        throw std::runtime_error("event line " + std::to_string(lineno) + ": expected '<A1|A2|B1|B2> <ps>'");
      }
      events.push_back({*det, *t});
      detail::check_order(last, events.back(), lineno);
    }
    return events;
  }
  std::array<char, 9> rec{};
  std::size_t n = 0;
  while (in.read(rec.data(), rec.size())) {
    ++n;
    const auto id = static_cast<std::uint8_t>(rec[0]);
    if (id >= kDetectorCount) {
      throw std::runtime_error("event record " + std::to_string(n) + ": bad detector id " + std::to_string(id));
    }
    std::uint64_t t = 0;
    for (int b = 0; b < 8; ++b) t |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(rec[1 + b])) << (8 * b);
    if (t > static_cast<std::uint64_t>(std::numeric_limits<Picoseconds>::max())) {
      throw std::runtime_error("event record " + std::to_string(n) + ": timestamp out of range");
    }
    events.push_back({kAllDetectors[id], static_cast<Picoseconds>(t)});
    detail::check_order(last, events.back(), n);
  }
  if (in.gcount() != 0) throw std::runtime_error("event file ends with a partial record");
  return events;
}

}  // namespace bsbunch
