// Command-line front end: run, compare, calibrate, predict, count.
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "bsbunch/config.hpp"
#include "bsbunch/event_io.hpp"
#include "bsbunch/experiment.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct ConfigOptions {
  std::string config_file;
  std::string preset;
  std::string model;
  std::string mean_photon_number;
  std::string seed;
  std::string output_dir;
  std::string workers;
  std::string repeats;
  std::vector<std::string> sets;

  void attach(CLI::App* app, bool with_model = true) {
    app->add_option("-c,--config", config_file, "Config file (key = value lines)");
    app->add_option("--preset", preset, "Named preset: reference-block1, reference-block2");
    if (with_model) app->add_option("-m,--model", model, "classical | phase-basis | bunching");
    app->add_option("-n,--mean-photon-number", mean_photon_number, "Mean photons per slot");
    app->add_option("-s,--seed", seed, "RNG seed");
    app->add_option("-o,--output-dir", output_dir, "Directory for report files");
    app->add_option("-j,--workers", workers, "Worker threads");
    app->add_option("-r,--repeats", repeats, "Number of summed acquisitions");
    app->add_option("--set", sets, "Override any config key: key=value (repeatable)");
  }

  [[nodiscard]] bsbunch::ExperimentConfig resolve(const std::vector<std::pair<std::string, std::string>>& extra = {})
      const {
    std::vector<std::string> errors;
    bsbunch::ConfigEntries file;
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw bsbunch::ConfigError({"cannot read config file " + config_file});
      std::stringstream ss;
      ss << in.rdbuf();
      file = bsbunch::parse_entries(ss.str(), errors, config_file + " line");
    }
    bsbunch::ConfigEntries flags;
    auto flag = [&](const char* key, const std::string& v) {
      if (!v.empty()) flags.push_back({key, v, "flag"});
    };
    flag("preset", preset);
    flag("model", model);
    flag("mean_photon_number", mean_photon_number);
    flag("seed", seed);
    flag("output_dir", output_dir);
    flag("workers", workers);
    flag("repeats", repeats);
    for (const auto& [k, v] : extra) flag(k.c_str(), v);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) {
        errors.push_back("--set " + s + ": expected key=value");
        continue;
      }
      flags.push_back({bsbunch::detail::trim(s.substr(0, eq)), bsbunch::detail::trim(s.substr(eq + 1)), "--set"});
    }
    return bsbunch::resolve_config(file, flags, std::move(errors));
  }
};

void report_progress(const char* what, unsigned done, unsigned total) {
  std::cerr << what << " " << done << "/" << total << "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Beam-splitter photon bunching simulator and coincidence analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(bsbunch::kVersion));

  ConfigOptions run_opts;
  auto* run = app.add_subcommand("run", "Simulate, count coincidences and write reports");
  run_opts.attach(run);

  ConfigOptions cmp_opts;
  std::vector<std::string> cmp_models;
  auto* cmp = app.add_subcommand("compare", "Replay one seeded source through several routing models");
  cmp_opts.attach(cmp, false);
  cmp->add_option("--models", cmp_models, "Models to compare (at least two)")->required()->delimiter(',');

  int cal_block = 1;
  std::string cal_targets;
  double cal_mean = 0.0;
  std::string cal_model = "classical";
  auto* cal = app.add_subcommand("calibrate", "Fit slot rate and efficiency from measured rates");
  cal->add_option("--block", cal_block, "Reference block (1 or 2)")->check(CLI::Range(1, 2));
  cal->add_option("--targets", cal_targets, "tally.csv-format file with measured rates");
  cal->add_option("-n,--mean-photon-number", cal_mean, "Mean photon number of the targets");
  cal->add_option("-m,--model", cal_model, "Model used for the fit");

  ConfigOptions pred_opts;
  auto* pred = app.add_subcommand("predict", "Closed-form rates only, no simulation");
  pred_opts.attach(pred);

  std::string count_events;
  std::string count_format = "text";
  bsbunch::Picoseconds count_window = 5000;
  double count_acq = 1.0;
  auto* cnt = app.add_subcommand("count", "Count coincidences in an event dump");
  cnt->add_option("--events", count_events, "Event dump file")->required();
  cnt->add_option("--format", count_format, "text | binary")->check(CLI::IsMember({"text", "binary"}));
  cnt->add_option("--window-ps", count_window, "Coincidence window half-width (ps)");
  cnt->add_option("--acquisition-s", count_acq, "Acquisition period (s)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) {
      const auto cfg = run_opts.resolve();
      const auto r = bsbunch::run_experiment(cfg, [](unsigned d, unsigned t) { report_progress("acquisition", d, t); });
      std::cout << bsbunch::tally_csv(r.tally);
      for (const auto& w : r.prediction.warnings) std::cerr << "warning: " << w << "\n";
    } else if (*cmp) {
      std::vector<bsbunch::RoutingModel> models;
      std::vector<std::string> errors;
      for (const auto& m : cmp_models) {
        if (auto parsed = bsbunch::parse_model(m)) {
          models.push_back(*parsed);
        } else {
          errors.push_back("models: unknown model '" + m + "'");
        }
      }
      if (models.size() < 2) errors.emplace_back("models: need at least two");
      if (!errors.empty()) throw bsbunch::ConfigError(errors);
      const auto cfg = cmp_opts.resolve({{"model", cmp_models.front()}});
      const auto rep = bsbunch::compare_models(cfg, models, [](unsigned d, unsigned t) { report_progress("model", d, t); });
      const std::string csv = bsbunch::comparison_csv(rep);
      std::filesystem::create_directories(cfg.output_dir);
      bsbunch::write_text_file(std::filesystem::path(cfg.output_dir) / "compare.csv", csv);
      std::cout << csv;
    } else if (*cal) {
      const auto model = bsbunch::parse_model(cal_model);
      if (!model) throw bsbunch::ConfigError({"model: unknown model '" + cal_model + "'"});
      bsbunch::CalibrationTargets targets;
      if (!cal_targets.empty()) {
        if (!(cal_mean > 0.0)) throw bsbunch::ConfigError({"mean_photon_number: required with --targets"});
        targets = bsbunch::targets_from_csv(read_file(cal_targets), cal_mean);
      } else {
        targets = bsbunch::reference_block(cal_block);
      }
      try {
        std::cout << bsbunch::calibration_csv(bsbunch::calibrate(targets, *model));
      } catch (const std::domain_error& e) {
        std::cerr << "calibration failed: " << e.what() << "\n";
        return kExitRuntime;
      }
    } else if (*pred) {
      const auto cfg = pred_opts.resolve();
      const auto p = bsbunch::predicted_rates(cfg.rate_inputs());
      std::cout << bsbunch::prediction_csv(p, bsbunch::g2_zero(p, cfg.slot_rate, cfg.simulation().ccu));
      for (const auto& w : p.warnings) std::cerr << "warning: " << w << "\n";
    } else if (*cnt) {
      std::ifstream in(count_events, std::ios::binary);
      if (!in) throw std::runtime_error("cannot read " + count_events);
      const auto fmt = count_format == "binary" ? bsbunch::EventFormat::Binary : bsbunch::EventFormat::Text;
      const auto events = bsbunch::read_events(in, fmt);
      bsbunch::CcuConfig ccu{count_window, count_acq};
      try {
        ccu.validate();
      } catch (const std::invalid_argument& e) {
        throw bsbunch::ConfigError({e.what()});
      }
      const auto streams = bsbunch::EventStreams::from_events(events, ccu.acquisition_ps());
      std::cout << bsbunch::tally_csv(bsbunch::accumulate(streams, ccu));
    }
  } catch (const bsbunch::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
