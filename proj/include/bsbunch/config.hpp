#pragma once

// Experiment configuration: a flat "key = value" text format with '#'
// comments, named presets, and layered resolution
// (command-line flag > config file > preset > built-in default).

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bsbunch/event_io.hpp"
#include "bsbunch/photon_source.hpp"
#include "bsbunch/routing.hpp"
#include "bsbunch/simulation.hpp"
#include "bsbunch/statistics.hpp"

namespace bsbunch {

inline constexpr std::string_view kVersion = "bsbunch 1.0.0";

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems)
      : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

  [[nodiscard]] const std::vector<std::string>& problems() const { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& p) {
    std::string s = "invalid configuration";
    for (const auto& x : p) s += "\n  " + x;
    return s;
  }
  std::vector<std::string> problems_;
};

struct ConfigEntry {
  std::string key;
  std::string value;
  std::string origin;  // e.g. "line 3" or "flag"
};

using ConfigEntries = std::vector<ConfigEntry>;

struct ExperimentConfig {
  std::string preset;
  RoutingModel model = RoutingModel::PhaseBasisSuperposition;
  double mean_photon_number = 0.0;
  double slot_rate = 0.0;
  double efficiency = 0.0;
  std::array<double, kDetectorCount> dark_rate{27.0, 27.0, 27.0, 27.0};
  Picoseconds dead_time_ps = 22'000;
  Picoseconds pulse_width_ps = 10'000;
  Picoseconds jitter_ps = 350;
  Picoseconds window_ps = 5'000;
  double acquisition_s = 1.0;
  std::uint64_t seed = 0;
  unsigned repeats = 1;
  unsigned workers = 1;  // execution only; never changes results
  bool exact_rates = false;
  std::string output_dir = "bsbunch-out";
  std::string dump_events;  // empty: no dump
  EventFormat dump_format = EventFormat::Text;

  [[nodiscard]] SimulationConfig simulation() const {
    SimulationConfig s;
    s.model = model;
    s.mean_photon_number = mean_photon_number;
    s.slot_rate = slot_rate;
    for (std::size_t d = 0; d < kDetectorCount; ++d) {
      DetectorConfig c;
      c.efficiency = efficiency;
      c.dead_time = dead_time_ps;
      c.dark_rate = dark_rate[d];
      c.pulse_width = pulse_width_ps;
      c.timing_jitter_sigma = jitter_ps;
      s.detectors[d] = c;
    }
    s.ccu.window = window_ps;
    s.ccu.acquisition = acquisition_s;
    s.seed = seed;
    s.workers = workers;
    return s;
  }

  [[nodiscard]] RateInputs rate_inputs() const {
    RateInputs in;
    in.model = model;
    in.mean_photon_number = mean_photon_number;
    in.slot_rate = slot_rate;
    in.efficiency = efficiency;
    in.dark_rate = dark_rate;
    in.window = window_ps;
    in.dead_time = dead_time_ps;
    in.exact = exact_rates;
    return in;
  }

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), r.ptr};
}

inline std::optional<double> parse_double(const std::string& s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

template <class Int>
std::optional<Int> parse_int(const std::string& s) {
  Int v{};
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<bool> parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  return std::nullopt;
}

inline const std::array<std::string_view, 4>& dark_keys() {
  static const std::array<std::string_view, 4> k{"dark_rate_a1", "dark_rate_a2", "dark_rate_b1", "dark_rate_b2"};
  return k;
}

}  // namespace detail

/// Calibration from the first reference block; the built-in defaults for
/// slot rate and efficiency.
inline const CalibrationResult& reference_calibration() {
  static const CalibrationResult c = calibrate(reference_block(1));
  return c;
}

inline std::vector<std::string> preset_names() { return {"reference-block1", "reference-block2"}; }

/// Key/value overrides a preset applies on top of the defaults.
inline std::optional<ConfigEntries> preset_entries(std::string_view name) {
  const auto& cal = reference_calibration();
  auto make = [&](double mean) {
    ConfigEntries e{{"mean_photon_number", detail::format_double(mean), "preset"},
                    {"acquisition_s", "1", "preset"},
                    {"dark_rate", "27", "preset"},
                    {"slot_rate", detail::format_double(cal.slot_rate), "preset"},
                    {"efficiency", detail::format_double(cal.efficiency), "preset"}};
    return e;
  };
  if (name == "reference-block1") return make(reference_block(1).mean_photon_number);
  if (name == "reference-block2") return make(reference_block(2).mean_photon_number);
  return std::nullopt;
}

/// Splits config text into entries; syntax problems are appended to errors.
inline ConfigEntries parse_entries(std::string_view text, std::vector<std::string>& errors,
                                   std::string_view origin_prefix = "line") {
  ConfigEntries out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  std::map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const std::string where = std::string(origin_prefix) + " " + std::to_string(lineno);
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      errors.push_back(where + ": expected 'key = value'");
      continue;
    }
    std::string key = detail::trim(std::string_view(t).substr(0, eq));
    std::string value = detail::trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) {
      errors.push_back(where + ": missing key");
      continue;
    }
    if (auto it = seen.find(key); it != seen.end()) {
      errors.push_back(where + ": duplicate key '" + key + "' (first set on line " + std::to_string(it->second) + ")");
      continue;
    }
    seen[key] = lineno;
    out.push_back({std::move(key), std::move(value), where});
  }
  return out;
}

/// Merges preset, file and flag layers over the defaults and validates the
/// result. Throws ConfigError listing every problem found.
inline ExperimentConfig resolve_config(const ConfigEntries& file, const ConfigEntries& flags,
                                       std::vector<std::string> errors = {}) {
  ExperimentConfig cfg;
  cfg.slot_rate = reference_calibration().slot_rate;
  cfg.efficiency = reference_calibration().efficiency;

  std::string preset;
  for (const auto* layer : {&file, &flags}) {
    for (const auto& e : *layer) {
      if (e.key == "preset") preset = e.value;
    }
  }
  ConfigEntries merged;
  if (!preset.empty()) {
    if (auto p = preset_entries(preset)) {
      merged = *p;
      cfg.preset = preset;
    } else {
      errors.push_back("preset: unknown preset '" + preset + "'");
    }
  }
  for (const auto* layer : {&file, &flags}) {
    for (const auto& e : *layer) {
      if (e.key != "preset") merged.push_back(e);
    }
  }

  bool have_model = false;
  bool have_mean = false;
  bool have_seed = false;
  std::optional<double> dark_all;
  std::array<std::optional<double>, kDetectorCount> dark_each{};

  auto bad = [&](const ConfigEntry& e, const std::string& why) {
    errors.push_back(e.key + " (" + e.origin + "): " + why + ", got '" + e.value + "'");
  };
  auto get_double = [&](const ConfigEntry& e, double lo, double hi, bool lo_open, bool hi_open,
                        const std::string& range) -> std::optional<double> {
    const auto v = detail::parse_double(e.value);
    if (!v) {
      bad(e, "expected a number");
      return std::nullopt;
    }
    const bool lo_ok = lo_open ? *v > lo : *v >= lo;
    const bool hi_ok = hi_open ? *v < hi : *v <= hi;
    if (!lo_ok || !hi_ok) {
      bad(e, "out of range, must be " + range);
      return std::nullopt;
    }
    return v;
  };
  auto get_ps = [&](const ConfigEntry& e, Picoseconds lo, const std::string& range) -> std::optional<Picoseconds> {
    const auto v = detail::parse_int<Picoseconds>(e.value);
    if (!v) {
      bad(e, "expected an integer number of picoseconds");
      return std::nullopt;
    }
    if (*v < lo) {
      bad(e, "out of range, must be " + range);
      return std::nullopt;
    }
    return v;
  };
  auto get_count = [&](const ConfigEntry& e) -> std::optional<unsigned> {
    const auto v = detail::parse_int<unsigned>(e.value);
    if (!v || *v == 0) {
      bad(e, "expected a positive integer");
      return std::nullopt;
    }
    return v;
  };
  constexpr double inf = std::numeric_limits<double>::infinity();

  for (const auto& e : merged) {
    const std::string& k = e.key;
    if (k == "model") {
      have_model = true;
      if (auto m = parse_model(e.value)) {
        cfg.model = *m;
      } else {
        bad(e, "expected one of classical, phase-basis, bunching");
      }
    } else if (k == "mean_photon_number") {
      have_mean = true;
      if (auto v = get_double(e, 0.0, kMaxMeanPhotonNumber, false, true, "in [0, 10)")) cfg.mean_photon_number = *v;
    } else if (k == "seed") {
      have_seed = true;
      if (auto v = detail::parse_int<std::uint64_t>(e.value)) {
        cfg.seed = *v;
      } else {
        bad(e, "expected an unsigned 64-bit integer");
      }
    } else if (k == "slot_rate") {
      if (auto v = get_double(e, 0.0, inf, true, true, "> 0")) cfg.slot_rate = *v;
    } else if (k == "efficiency") {
      if (auto v = get_double(e, 0.0, 1.0, false, false, "in [0, 1]")) cfg.efficiency = *v;
    } else if (k == "dark_rate") {
      if (auto v = get_double(e, 0.0, inf, false, true, ">= 0")) dark_all = *v;
    } else if (auto it = std::find(detail::dark_keys().begin(), detail::dark_keys().end(), k);
               it != detail::dark_keys().end()) {
      if (auto v = get_double(e, 0.0, inf, false, true, ">= 0")) {
        dark_each[static_cast<std::size_t>(it - detail::dark_keys().begin())] = *v;
      }
    } else if (k == "dead_time_ps") {
      if (auto v = get_ps(e, 0, ">= 0")) cfg.dead_time_ps = *v;
    } else if (k == "pulse_width_ps") {
      if (auto v = get_ps(e, 0, ">= 0")) cfg.pulse_width_ps = *v;
    } else if (k == "jitter_ps") {
      if (auto v = get_ps(e, 0, ">= 0")) cfg.jitter_ps = *v;
    } else if (k == "window_ps") {
      if (auto v = get_ps(e, 1, "> 0")) cfg.window_ps = *v;
    } else if (k == "acquisition_s") {
      if (auto v = get_double(e, 0.0, inf, true, true, "> 0")) cfg.acquisition_s = *v;
    } else if (k == "repeats") {
      if (auto v = get_count(e)) cfg.repeats = *v;
    } else if (k == "workers") {
      if (auto v = get_count(e)) cfg.workers = *v;
    } else if (k == "exact_rates") {
      if (auto v = detail::parse_bool(e.value)) {
        cfg.exact_rates = *v;
      } else {
        bad(e, "expected true or false");
      }
    } else if (k == "output_dir") {
      cfg.output_dir = e.value;
    } else if (k == "dump_events") {
      cfg.dump_events = e.value;
    } else if (k == "dump_format") {
      if (e.value == "text") {
        cfg.dump_format = EventFormat::Text;
      } else if (e.value == "binary") {
        cfg.dump_format = EventFormat::Binary;
      } else {
        bad(e, "expected text or binary");
      }
    } else {
      errors.push_back(k + " (" + e.origin + "): unknown key");
    }
  }

  if (dark_all) cfg.dark_rate.fill(*dark_all);
  for (std::size_t d = 0; d < kDetectorCount; ++d) {
    if (dark_each[d]) cfg.dark_rate[d] = *dark_each[d];
  }
  if (!have_model) errors.emplace_back("model: missing required key");
  if (!have_mean) errors.emplace_back("mean_photon_number: missing required key");
  if (!have_seed) errors.emplace_back("seed: missing required key");
  if (cfg.dead_time_ps < cfg.pulse_width_ps) {
    errors.push_back("dead_time_ps: must be >= pulse_width_ps (" + std::to_string(cfg.dead_time_ps) + " < " +
                     std::to_string(cfg.pulse_width_ps) + ")");
  }
  if (errors.empty()) {
    try {
      (void)cfg.simulation().source(cfg.seed).slot_count();
    } catch (const std::exception& ex) {
      errors.push_back(std::string("acquisition_s * slot_rate: ") + ex.what());
    }
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

inline ExperimentConfig parse_config(std::string_view text) {
  std::vector<std::string> errors;
  ConfigEntries entries = parse_entries(text, errors);
  return resolve_config(entries, {}, std::move(errors));
}

/// Every result-affecting setting in canonical "key = value" form. Parsing
/// the echo reproduces the configuration; `workers` is deliberately absent
/// because it only changes how the work is scheduled.
inline std::vector<std::pair<std::string, std::string>> config_echo(const ExperimentConfig& c) {
  std::vector<std::pair<std::string, std::string>> e;
  if (!c.preset.empty()) e.emplace_back("preset", c.preset);
  e.emplace_back("model", std::string(model_name(c.model)));
  e.emplace_back("mean_photon_number", detail::format_double(c.mean_photon_number));
  e.emplace_back("seed", std::to_string(c.seed));
  e.emplace_back("slot_rate", detail::format_double(c.slot_rate));
  e.emplace_back("efficiency", detail::format_double(c.efficiency));
  for (std::size_t d = 0; d < kDetectorCount; ++d) {
    e.emplace_back(std::string(detail::dark_keys()[d]), detail::format_double(c.dark_rate[d]));
  }
  e.emplace_back("dead_time_ps", std::to_string(c.dead_time_ps));
  e.emplace_back("pulse_width_ps", std::to_string(c.pulse_width_ps));
  e.emplace_back("jitter_ps", std::to_string(c.jitter_ps));
  e.emplace_back("window_ps", std::to_string(c.window_ps));
  e.emplace_back("acquisition_s", detail::format_double(c.acquisition_s));
  e.emplace_back("repeats", std::to_string(c.repeats));
  e.emplace_back("exact_rates", c.exact_rates ? "true" : "false");
  e.emplace_back("output_dir", c.output_dir);
  if (!c.dump_events.empty()) {
    e.emplace_back("dump_events", c.dump_events);
    e.emplace_back("dump_format", c.dump_format == EventFormat::Text ? "text" : "binary");
  }
  return e;
}

inline std::string config_text(const ExperimentConfig& c) {
  std::string s;
  for (const auto& [k, v] : config_echo(c)) s += k + " = " + v + "\n";
  return s;
}

}  // namespace bsbunch
