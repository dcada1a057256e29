// Calibrates against the reference rates, simulates one second per model and
// prints the four reported pair counters next to the bunching fraction.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "bsbunch/config.hpp"
#include "bsbunch/experiment.hpp"

using namespace bsbunch;

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
  const auto& cal = reference_calibration();
  std::printf("slot rate %.4g /s, efficiency %.4f\n\n", cal.slot_rate, cal.efficiency);
  std::printf("%-12s %9s %9s %9s %9s %9s %8s\n", "model", "A1", "A1A2", "B1B2", "A1B1", "A1B2", "bunch");
  for (auto m : kAllModels) {
    auto cfg = parse_config("preset = reference-block1\nmodel = classical\nmean_photon_number = 0.022\nseed = " +
                            std::to_string(seed) + "\n");
    cfg.model = m;
    const auto r = run_simulation(cfg);
    std::printf("%-12s %9llu %9llu %9llu %9llu %9llu %8.4f\n", std::string(model_name(m)).c_str(),
                static_cast<unsigned long long>(r.tally.singles[0]),
                static_cast<unsigned long long>(r.tally.pairs[0]), static_cast<unsigned long long>(r.tally.pairs[1]),
                static_cast<unsigned long long>(r.tally.pairs[2]), static_cast<unsigned long long>(r.tally.pairs[3]),
                r.observed.bunching_fraction.value_or(0.0));
  }
}
