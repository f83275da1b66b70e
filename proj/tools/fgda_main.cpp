// Command-line front end for the spectral data-assimilation pipeline.  Each
// subcommand wraps one library stage; the stages also run in-process from the
// test suite, so this file only does argument plumbing and exit-code mapping.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fgda/config.hpp"
#include "fgda/errors.hpp"
#include "fgda/experiment.hpp"
#include "fgda/verify.hpp"

namespace {

int dispatch(int argc, char** argv) {
  CLI::App app{"Spectral vorticity data assimilation pipeline"};
  app.require_subcommand(1);

  std::string config_path, out_dir, truth_dir, obs_dir, param_pointer;
  std::vector<double> sweep_values;
  std::uint64_t seed_value = 0;
  bool seed_given = false;
  int verify_grid = 8;
  std::uint64_t verify_seed = 20260822ull;

  CLI::App* c_config = app.add_subcommand(
      "config", "Validate a config file and print its canonical hash");
  c_config->add_option("--config", config_path, "experiment config JSON")->required();

  CLI::App* c_sim = app.add_subcommand(
      "simulate", "Integrate the truth trajectory and write truth.csv");
  c_sim->add_option("--config", config_path)->required();
  c_sim->add_option("--out", out_dir, "output directory")->required();

  CLI::App* c_obs = app.add_subcommand(
      "observe", "Sample noisy observations from a simulated truth");
  c_obs->add_option("--config", config_path)->required();
  c_obs->add_option("--truth", truth_dir, "directory holding truth outputs")->required();
  c_obs->add_option("--out", out_dir)->required();
  c_obs->add_option("--seed", seed_value, "override the config noise seed")
      ->each([&seed_given](const std::string&) { seed_given = true; });

  CLI::App* c_asm = app.add_subcommand(
      "assimilate", "Run the filter against recorded observations");
  c_asm->add_option("--config", config_path)->required();
  c_asm->add_option("--obs", obs_dir, "directory holding observation outputs")
      ->required();
  c_asm->add_option("--truth", truth_dir,
                    "optional truth directory for twin-experiment error tracking");
  c_asm->add_option("--out", out_dir)->required();

  CLI::App* c_verify = app.add_subcommand(
      "verify", "Run the structural and numerical verification suites");
  c_verify->add_option("--out", out_dir, "directory for verify_report.json");
  c_verify->add_option("--grid-n", verify_grid, "verification grid edge (even, >= 4)");
  c_verify->add_option("--seed", verify_seed);

  CLI::App* c_sweep = app.add_subcommand(
      "sweep", "Repeat the full pipeline across values of one parameter");
  c_sweep->add_option("--config", config_path)->required();
  c_sweep->add_option("--param", param_pointer,
                      "JSON pointer of the parameter, e.g. /observation/noise_amplitude")
      ->required();
  c_sweep->add_option("--values", sweep_values, "parameter values")
      ->required()
      ->delimiter(',');
  c_sweep->add_option("--out", out_dir)->required();

  CLI11_PARSE(app, argc, argv);

  if (c_config->parsed()) {
    const fgda::ExperimentConfig cfg = fgda::load_config_file(config_path);
    std::printf("config ok: grid %dx%d, %d modes, %d steps of dt=%g\n", cfg.n1, cfg.n2,
                cfg.make_grid().size(), cfg.step_count(), cfg.dt);
    std::printf("canonical hash: %s\n", cfg.hash.c_str());
    return 0;
  }
  if (c_sim->parsed()) {
    fgda::cmd_simulate(fgda::load_config_file(config_path), out_dir);
    std::printf("simulate: wrote %s\n", out_dir.c_str());
    return 0;
  }
  if (c_obs->parsed()) {
    std::optional<std::uint64_t> seed;
    if (seed_given) seed = seed_value;
    fgda::cmd_observe(fgda::load_config_file(config_path), truth_dir, out_dir, seed);
    std::printf("observe: wrote %s\n", out_dir.c_str());
    return 0;
  }
  if (c_asm->parsed()) {
    fgda::cmd_assimilate(fgda::load_config_file(config_path), obs_dir, truth_dir,
                         out_dir);
    return 0;
  }
  if (c_verify->parsed()) {
    fgda::VerifyOptions opts;
    opts.grid_n = verify_grid;
    opts.seed = verify_seed;
    const fgda::VerifyReport report = fgda::run_verification(opts);
    for (const fgda::SuiteResult& s : report.suites) {
      std::printf("[%s] %-24s worst=%.3e tol=%.3e  %s\n", s.passed ? "PASS" : "FAIL",
                  s.name.c_str(), s.worst, s.tolerance, s.detail.c_str());
    }
    if (!out_dir.empty()) {
      std::filesystem::create_directories(out_dir);
      fgda::write_verify_report(out_dir + "/verify_report.json", report);
    }
    if (!report.all_passed()) {
      throw fgda::VerificationFailure("one or more verification suites failed");
    }
    std::printf("verification: %zu suites passed\n", report.suites.size());
    return 0;
  }
  if (c_sweep->parsed()) {
    const fgda::ExperimentConfig base = fgda::load_config_file(config_path);
    fgda::cmd_sweep(base.canonical_json, param_pointer, sweep_values, out_dir);
    std::printf("sweep: wrote %s/sweep_summary.csv\n", out_dir.c_str());
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const fgda::VerificationFailure& err) {
    std::fprintf(stderr, "verification failure: %s\n", err.what());
    return 3;
  } catch (const fgda::NumericalError& err) {
    std::fprintf(stderr, "numerical error: %s\n", err.what());
    return 2;
  } catch (const fgda::ValidationError& err) {
    std::fprintf(stderr, "invalid input: %s\n", err.what());
    return 1;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
}
