#pragma once

// Orchestration of complete runs and the report files they produce.
//
// Report schemas (all CSV files have a header row, comma separated, '.'
// decimal point):
//   tally.csv     counter_name,count,rate_per_s
//   analysis.csv  name,observed,predicted,relative_residual
//   compare.csv   counter_name,<model>_count...,z_<model>...
//   run.json      config echo, seed, version tag, counters, correlation
// Counter names: singles_<D>, pair_<D>_<D>, triple_<D>_<D>_<D> with
// D in {A1, A2, B1, B2} for A', A'', B', B''.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bsbunch/coincidence.hpp"
#include "bsbunch/config.hpp"
#include "bsbunch/event_io.hpp"
#include "bsbunch/simulation.hpp"
#include "bsbunch/statistics.hpp"

namespace bsbunch {

using ProgressFn = std::function<void(unsigned done, unsigned total)>;

struct ExperimentResult {
  ExperimentConfig config;
  TallyTable tally;
  AcquisitionStats stats;
  RatePrediction prediction;
  CorrelationResult observed;
  CorrelationResult predicted;
};

struct CounterRow {
  std::string name;
  std::uint64_t count = 0;
  double rate_per_s = 0.0;
};

/// All 14 counters in canonical order.
inline std::vector<CounterRow> counter_rows(const TallyTable& t) {
  std::vector<CounterRow> rows;
  const double acq = t.acquisition;
  auto rate = [&](std::uint64_t c) { return acq > 0.0 ? static_cast<double>(c) / acq : 0.0; };
  for (std::size_t i = 0; i < kDetectorCount; ++i) {
    rows.push_back({singles_name(kAllDetectors[i]), t.singles[i], rate(t.singles[i])});
  }
  for (std::size_t i = 0; i < kPairCount; ++i) rows.push_back({pair_name(kAllPairs[i]), t.pairs[i], rate(t.pairs[i])});
  for (std::size_t i = 0; i < kTripleCount; ++i) {
    rows.push_back({triple_name(kAllTriples[i]), t.triples[i], rate(t.triples[i])});
  }
  return rows;
}

inline std::vector<double> prediction_values(const RatePrediction& p) {
  std::vector<double> v(p.singles.begin(), p.singles.end());
  v.insert(v.end(), p.pairs.begin(), p.pairs.end());
  v.insert(v.end(), p.triples.begin(), p.triples.end());
  return v;
}

inline std::string format_number(double v) {
  std::ostringstream s;
  s << std::setprecision(12) << v;
  return s.str();
}

inline std::string tally_csv(const TallyTable& t) {
  std::string out = "counter_name,count,rate_per_s\n";
  for (const auto& r : counter_rows(t)) {
    out += r.name + "," + std::to_string(r.count) + "," + format_number(r.rate_per_s) + "\n";
  }
  return out;
}

/// Parses tally.csv text back into rows; throws std::runtime_error on a
/// schema violation.
inline std::vector<CounterRow> read_tally_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != "counter_name,count,rate_per_s") {
    throw std::runtime_error("tally csv: unexpected header");
  }
  std::vector<CounterRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    std::istringstream ls(line);
    std::string name;
    std::string count;
    std::string rate;
    if (!std::getline(ls, name, ',') || !std::getline(ls, count, ',') || !std::getline(ls, rate)) {
      throw std::runtime_error("tally csv line " + std::to_string(lineno) + ": expected three fields");
    }
    const auto c = detail::parse_int<std::uint64_t>(detail::trim(count));
    const auto r = detail::parse_double(detail::trim(rate));
    if (!c || !r) throw std::runtime_error("tally csv line " + std::to_string(lineno) + ": bad number");
    rows.push_back({name, *c, *r});
  }
  return rows;
}

/// Rebuilds counts from rows (by counter name) for a given acquisition time.
inline TallyTable tally_from_rows(const std::vector<CounterRow>& rows, double acquisition) {
  TallyTable t;
  t.acquisition = acquisition;
  t.acquisitions = 1;
  for (const auto& r : rows) {
    bool found = false;
    for (std::size_t i = 0; i < kDetectorCount && !found; ++i) {
      if (r.name == singles_name(kAllDetectors[i])) t.singles[i] = r.count, found = true;
    }
    for (std::size_t i = 0; i < kPairCount && !found; ++i) {
      if (r.name == pair_name(kAllPairs[i])) t.pairs[i] = r.count, found = true;
    }
    for (std::size_t i = 0; i < kTripleCount && !found; ++i) {
      if (r.name == triple_name(kAllTriples[i])) t.triples[i] = r.count, found = true;
    }
    if (!found) throw std::runtime_error("tally csv: unknown counter '" + r.name + "'");
  }
  return t;
}

inline std::string optional_cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

inline std::string analysis_csv(const ExperimentResult& r) {
  std::string out = "name,observed,predicted,relative_residual\n";
  const auto rows = counter_rows(r.tally);
  const auto pred = prediction_values(r.prediction);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::optional<double> resid;
    if (pred[i] > 0.0) resid = (rows[i].rate_per_s - pred[i]) / pred[i];
    out += rows[i].name + "," + format_number(rows[i].rate_per_s) + "," + format_number(pred[i]) + "," +
           optional_cell(resid) + "\n";
  }
  auto corr_row = [&](const char* name, const std::optional<double>& o, const std::optional<double>& p) {
    std::optional<double> resid;
    if (o && p && *p != 0.0) resid = (*o - *p) / *p;
    out += std::string(name) + "," + optional_cell(o) + "," + optional_cell(p) + "," + optional_cell(resid) + "\n";
  };
  corr_row("g2_cross", r.observed.g2_cross, r.predicted.g2_cross);
  corr_row("g2_same", r.observed.g2_same, r.predicted.g2_same);
  corr_row("bunching_fraction", r.observed.bunching_fraction, r.predicted.bunching_fraction);
  return out;
}

inline nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

inline nlohmann::ordered_json run_metadata(const ExperimentResult& r) {
  nlohmann::ordered_json j;
  j["version"] = kVersion;
  j["model"] = model_name(r.config.model);
  j["seed"] = r.config.seed;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config_echo(r.config)) cfg[k] = v;
  j["config"] = cfg;
  j["acquisition_s"] = r.tally.acquisition;
  j["acquisitions"] = r.tally.acquisitions;
  nlohmann::ordered_json reference = nlohmann::ordered_json::array();
  for (auto d : kAllDetectors) reference.push_back(singles_name(d));
  for (const auto& p : kAllPairs) {
    if (p.reported_in_reference) reference.push_back(pair_name(p));
  }
  for (const auto& t : kAllTriples) reference.push_back(triple_name(t));
  j["reference_counters"] = reference;
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (const auto& row : counter_rows(r.tally)) counts[row.name] = row.count;
  j["counts"] = counts;
  j["stats"] = {{"slots", r.stats.slots},
                {"occupied_slots", r.stats.occupied_slots},
                {"photons", r.stats.photons},
                {"fallback_slots", r.stats.fallback_slots},
                {"dark_clicks_before_dead_time", r.stats.dark_clicks}};
  j["routing_fallback_used"] = r.stats.fallback_slots > 0;
  j["correlation"] = {{"g2_cross", optional_json(r.observed.g2_cross)},
                      {"g2_same", optional_json(r.observed.g2_same)},
                      {"bunching_fraction", optional_json(r.observed.bunching_fraction)}};
  j["warnings"] = r.prediction.warnings;
  return j;
}

inline void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

/// Runs the configured simulation and analysis. Nothing is written to disk.
inline ExperimentResult run_simulation(const ExperimentConfig& cfg, const ProgressFn& progress = {}) {
  ExperimentResult r;
  r.config = cfg;
  const SimulationConfig sim = cfg.simulation();
  const SimulationResult s = simulate(sim, cfg.repeats, [&](unsigned d, unsigned t) {
    if (progress) progress(d, t);
  });
  r.tally = s.tally;
  r.stats = s.stats;
  r.tally.metadata["model"] = std::string(model_name(cfg.model));
  r.tally.metadata["seed"] = std::to_string(cfg.seed);
  r.prediction = predicted_rates(cfg.rate_inputs());
  r.observed = g2_zero(r.tally, cfg.slot_rate, sim.ccu);
  r.predicted = g2_zero(r.prediction, cfg.slot_rate, sim.ccu);
  return r;
}

/// Writes tally.csv, analysis.csv and run.json into cfg.output_dir and, if
/// requested, the event dump of the first acquisition.
inline void write_reports(const ExperimentResult& r) {
  const std::filesystem::path dir(r.config.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  write_text_file(dir / "tally.csv", tally_csv(r.tally));
  write_text_file(dir / "analysis.csv", analysis_csv(r));
  write_text_file(dir / "run.json", run_metadata(r).dump(2) + "\n");
  if (!r.config.dump_events.empty()) {
    const SimulationConfig sim = r.config.simulation();
    const Acquisition acq = simulate_acquisition(sim, acquisition_seed(sim.seed, 0));
    std::ofstream out(r.config.dump_events, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + r.config.dump_events + " for writing");
    write_events(out, acq.streams, r.config.dump_format);
    if (!out) throw std::runtime_error("failed writing " + r.config.dump_events);
  }
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const ProgressFn& progress = {}) {
  ExperimentResult r = run_simulation(cfg, progress);
  write_reports(r);
  return r;
}

struct ModelRun {
  RoutingModel model;
  TallyTable tally;
  CorrelationResult correlation;
};

struct ComparisonReport {
  std::vector<ModelRun> runs;
  // z_scores[k][c]: counter c of run k against run 0, (x_k - x_0) / sqrt(x_k + x_0).
  std::vector<std::vector<double>> z_scores;
};

inline double count_z_score(std::uint64_t a, std::uint64_t b) {
  const double s = static_cast<double>(a) + static_cast<double>(b);
  if (s == 0.0) return 0.0;
  return (static_cast<double>(a) - static_cast<double>(b)) / std::sqrt(s);
}

/// Replays the same seeded source stream through each model.
inline ComparisonReport compare_models(const ExperimentConfig& cfg, const std::vector<RoutingModel>& models,
                                       const ProgressFn& progress = {}) {
  if (models.size() < 2) throw std::invalid_argument("compare_models: need at least two models");
  ComparisonReport rep;
  for (std::size_t k = 0; k < models.size(); ++k) {
    ExperimentConfig c = cfg;
    c.model = models[k];
    const SimulationConfig sim = c.simulation();
    const SimulationResult s = simulate(sim, c.repeats, [&](unsigned, unsigned) {
      if (progress) progress(static_cast<unsigned>(k + 1), static_cast<unsigned>(models.size()));
    });
    rep.runs.push_back({models[k], s.tally, g2_zero(s.tally, c.slot_rate, sim.ccu)});
  }
  const auto base = counter_rows(rep.runs.front().tally);
  for (const auto& run : rep.runs) {
    const auto rows = counter_rows(run.tally);
    std::vector<double> z;
    for (std::size_t i = 0; i < rows.size(); ++i) z.push_back(count_z_score(rows[i].count, base[i].count));
    rep.z_scores.push_back(std::move(z));
  }
  return rep;
}

inline std::string comparison_csv(const ComparisonReport& rep) {
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < rep.runs.size(); ++k) {
    labels.push_back(std::string(model_name(rep.runs[k].model)) + "#" + std::to_string(k));
  }
  std::string out = "counter_name";
  for (const auto& l : labels) out += "," + l + "_count";
  for (std::size_t k = 1; k < labels.size(); ++k) out += ",z_" + labels[k];
  out += "\n";
  std::vector<std::vector<CounterRow>> rows;
  for (const auto& run : rep.runs) rows.push_back(counter_rows(run.tally));
  auto corr_line = [&](const char* name, auto member) {
    out += name;
    for (const auto& run : rep.runs) out += "," + optional_cell(run.correlation.*member);
    for (std::size_t k = 1; k < labels.size(); ++k) out += ",";
    out += "\n";
  };
  for (std::size_t i = 0; i < rows.front().size(); ++i) {
    out += rows.front()[i].name;
    for (const auto& r : rows) out += "," + std::to_string(r[i].count);
    for (std::size_t k = 1; k < rows.size(); ++k) out += "," + format_number(rep.z_scores[k][i]);
    out += "\n";
  }
  corr_line("g2_cross", &CorrelationResult::g2_cross);
  corr_line("g2_same", &CorrelationResult::g2_same);
  corr_line("bunching_fraction", &CorrelationResult::bunching_fraction);
  return out;
}

inline std::string calibration_csv(const CalibrationResult& c) {
  std::string out = "name,value\n";
  out += "slot_rate," + format_number(c.slot_rate) + "\n";
  out += "efficiency," + format_number(c.efficiency) + "\n";
  for (const auto& [k, v] : c.residuals) out += "residual." + k + "," + format_number(v) + "\n";
  return out;
}

inline std::string prediction_csv(const RatePrediction& p, const CorrelationResult& corr) {
  std::string out = "name,rate_per_s\n";
  const TallyTable names{};
  const auto rows = counter_rows(names);
  const auto vals = prediction_values(p);
  for (std::size_t i = 0; i < rows.size(); ++i) out += rows[i].name + "," + format_number(vals[i]) + "\n";
  out += "g2_cross," + optional_cell(corr.g2_cross) + "\n";
  out += "g2_same," + optional_cell(corr.g2_same) + "\n";
  out += "bunching_fraction," + optional_cell(corr.bunching_fraction) + "\n";
  return out;
}

/// Reads calibration targets from tally.csv-shaped text, using rate_per_s.
inline CalibrationTargets targets_from_csv(std::string_view text, double mean_photon_number) {
  CalibrationTargets t;
  t.mean_photon_number = mean_photon_number;
  for (const auto& r : read_tally_csv(text)) {
    bool found = false;
    for (std::size_t i = 0; i < kDetectorCount && !found; ++i) {
      if (r.name == singles_name(kAllDetectors[i])) t.singles[i] = r.rate_per_s, found = true;
    }
    for (std::size_t i = 0; i < kPairCount && !found; ++i) {
      if (r.name == pair_name(kAllPairs[i])) t.pairs[i] = r.rate_per_s, found = true;
    }
    for (std::size_t i = 0; i < kTripleCount && !found; ++i) {
      if (r.name == triple_name(kAllTriples[i])) t.triples[i] = r.rate_per_s, found = true;
    }
    if (!found) throw std::runtime_error("targets csv: unknown counter '" + r.name + "'");
  }
  return t;
}

}  // namespace bsbunch
