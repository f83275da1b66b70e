#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fgda/config.hpp"
#include "fgda/dynamics.hpp"
#include "fgda/estimator.hpp"
#include "fgda/observation.hpp"

namespace fgda {

// Pipeline stages behind the command-line subcommands, callable directly so
// tests exercise them in-process.  Each stage writes its outputs plus a
// checksummed manifest into its output directory, and refuses upstream files
// whose manifest hash or checksums disagree with the supplied config.

void cmd_simulate(const ExperimentConfig& cfg, const std::string& out_dir);

void cmd_observe(const ExperimentConfig& cfg, const std::string& truth_dir,
                 const std::string& out_dir,
                 std::optional<std::uint64_t> seed_override = std::nullopt);

struct AssimilateSummary {
  bool twin = false;
  bool failed = false;
  std::string failure;
  double final_rel_full = 0.0;
  double worst_rel_tail = 0.0;  // max relative error over the second half
  double det_pass_fraction = 0.0;
  double lmi_holds_fraction = 0.0;
};

AssimilateSummary cmd_assimilate(const ExperimentConfig& cfg, const std::string& obs_dir,
                                 const std::string& truth_dir,  // empty: no twin
                                 const std::string& out_dir);

// Re-runs the pipeline once per value of the parameter at `param_pointer`
// (JSON pointer into the config, e.g. "/observation/noise_amplitude") and
// tabulates the assimilation summaries.
void cmd_sweep(const std::string& config_text, const std::string& param_pointer,
               const std::vector<double>& values, const std::string& out_dir);

// Loaders shared between stages and tests.
Trajectory load_trajectory_csv(const std::string& path, const ModeGrid& grid);
ObservationSeries load_observations_csv(const std::string& path, int observed_count);

}  // namespace fgda
