#include "fgda/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "fgda/csv.hpp"
#include "fgda/errors.hpp"
#include "fgda/manifest.hpp"
#include "fgda/rng.hpp"
#include "fgda/transforms.hpp"

namespace fgda {

namespace fs = std::filesystem;

namespace {

class WallTimer {
 public:
  WallTimer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::string compact_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string grid_desc(const ExperimentConfig& cfg) {
  return std::to_string(cfg.n1) + "x" + std::to_string(cfg.n2);
}

void record_output(RunManifest* manifest, const std::string& dir,
                   const std::string& name) {
  FileRecord rec;
  rec.name = name;
  rec.bytes = static_cast<std::uint64_t>(fs::file_size(dir + "/" + name));
  rec.checksum = fnv1a64_file_hex(dir + "/" + name);
  manifest->outputs.push_back(rec);
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  const int n = static_cast<int>(traj.states.front().size());
  CsvWriter csv(path);
  std::vector<std::string> header;
  header.reserve(1 + 2 * n);
  header.push_back("t");
  for (int k = 0; k < n; ++k) {
    header.push_back("re_" + std::to_string(k));
    header.push_back("im_" + std::to_string(k));
  }
  csv.write_header(header);
  std::vector<double> row(1 + 2 * n);
  for (std::size_t s = 0; s < traj.states.size(); ++s) {
    row[0] = traj.times[static_cast<int>(s)];
    for (int k = 0; k < n; ++k) {
      row[1 + 2 * k] = traj.states[s][k].real();
      row[2 + 2 * k] = traj.states[s][k].imag();
    }
    csv.write_row(row);
  }
  csv.close();
}

void write_field_csv(const std::string& path, const Eigen::MatrixXd& field) {
  CsvWriter csv(path);
  std::vector<std::string> header(field.cols());
  for (int j = 0; j < field.cols(); ++j) header[j] = "c" + std::to_string(j);
  csv.write_header(header);
  std::vector<double> row(field.cols());
  for (int i = 0; i < field.rows(); ++i) {
    for (int j = 0; j < field.cols(); ++j) row[j] = field(i, j);
    csv.write_row(row);
  }
  csv.close();
}

std::string snapshot_name(const std::string& prefix, double t) {
  std::string tag = compact_number(t);
  for (char& c : tag) {
    if (c == '.') c = 'p';
    if (c == '-') c = 'm';
  }
  return prefix + "_t" + tag + ".csv";
}

GmresOptions gmres_options(const ExperimentConfig& cfg) {
  GmresOptions o;
  o.rel_tol = cfg.gmres_tol;
  o.restart = cfg.gmres_restart;
  o.max_iters = cfg.gmres_max_iters;
  return o;
}

}  // namespace

Trajectory load_trajectory_csv(const std::string& path, const ModeGrid& grid) {
  const CsvTable table = read_csv(path);
  const int n = grid.size();
  if (static_cast<int>(table.header.size()) != 1 + 2 * n) {
    throw ValidationError(path + " has " + std::to_string(table.header.size()) +
                          " columns; config grid needs " + std::to_string(1 + 2 * n));
  }
  Trajectory traj;
  traj.times.resize(table.rows.size());
  traj.states.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    traj.times[static_cast<int>(r)] = table.rows[r][0];
    SpectralVorticity w(n);
    for (int k = 0; k < n; ++k) {
      w[k] = Cplx(table.rows[r][1 + 2 * k], table.rows[r][2 + 2 * k]);
    }
    require_valid_state(w, grid, "loaded trajectory state");
    traj.states.push_back(std::move(w));
  }
  return traj;
}

ObservationSeries load_observations_csv(const std::string& path, int observed_count) {
  const CsvTable table = read_csv(path);
  if (static_cast<int>(table.header.size()) != 1 + 2 * observed_count) {
    throw ValidationError(path + " does not match the configured observation count");
  }
  ObservationSeries series;
  series.times.resize(table.rows.size());
  series.values.resize(observed_count, table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    series.times[static_cast<int>(r)] = table.rows[r][0];
    for (int k = 0; k < observed_count; ++k) {
      series.values(k, static_cast<int>(r)) =
          Cplx(table.rows[r][1 + 2 * k], table.rows[r][2 + 2 * k]);
    }
  }
  return series;
}

void cmd_simulate(const ExperimentConfig& cfg, const std::string& out_dir) {
  WallTimer timer;
  fs::create_directories(out_dir);
  const ModeGrid grid = cfg.make_grid();
  const ForcingSpec forcing = cfg.make_forcing(grid);
  const SpectralVorticity w0 = cfg.make_initial_state(grid);

  const Trajectory traj = simulate_truth(w0, forcing, cfg.viscosity, grid, cfg.dt,
                                         cfg.t_final, gmres_options(cfg));

  RunManifest manifest;
  manifest.command = "simulate";
  manifest.config_hash = cfg.hash;
  manifest.seed = cfg.seed;
  manifest.rng_id = PortableRng::id();
  manifest.grid_desc = grid_desc(cfg);

  write_trajectory_csv(out_dir + "/truth.csv", traj);
  record_output(&manifest, out_dir, "truth.csv");

  for (double st : cfg.snapshot_times) {
    const int idx = static_cast<int>(std::llround(st / cfg.dt));
    const Eigen::MatrixXd field =
        evaluate_field(traj.states[idx], grid, cfg.field_resolution);
    const std::string name = snapshot_name("truth_field", st);
    write_field_csv(out_dir + "/" + name, field);
    record_output(&manifest, out_dir, name);
  }

  manifest.summary["steps"] = static_cast<double>(traj.states.size() - 1);
  manifest.summary["enstrophy_initial"] = enstrophy(traj.states.front());
  manifest.summary["enstrophy_final"] = enstrophy(traj.states.back());
  manifest.summary["max_symmetry_correction"] = traj.max_symmetry_correction;
  manifest.notes["forcing"] = forcing.note;
  manifest.wall_seconds = timer.seconds();
  write_manifest(out_dir, manifest);
}

void cmd_observe(const ExperimentConfig& cfg, const std::string& truth_dir,
                 const std::string& out_dir, std::optional<std::uint64_t> seed_override) {
  WallTimer timer;
  const RunManifest upstream = read_manifest(truth_dir, "simulate");
  if (upstream.config_hash != cfg.hash) {
    throw ValidationError("truth outputs were produced under config hash " +
                          upstream.config_hash + ", current config is " + cfg.hash +
                          "; refusing to mix runs");
  }
  verify_manifest_file(truth_dir, upstream, "truth.csv");

  fs::create_directories(out_dir);
  const ModeGrid grid = cfg.make_grid();
  const Trajectory traj = load_trajectory_csv(truth_dir + "/truth.csv", grid);
  const ObservationModel model = cfg.make_observation(grid);
  const std::uint64_t seed = seed_override.value_or(cfg.seed);

  const ObservationSeries series = generate_observations(
      traj, model, grid, cfg.noise_amplitude, seed, cfg.literal_noise_interval);

  CsvWriter csv(out_dir + "/observations.csv");
  std::vector<std::string> header;
  header.push_back("t");
  for (int i = 0; i < model.observed_count(); ++i) {
    std::string label = std::to_string(i);
    if (model.is_selection()) {
      const auto [c, d] = model.selected_modes[i];
      label = "m" + std::to_string(c) + "_" + std::to_string(d);
    }
    header.push_back("re_" + label);
    header.push_back("im_" + label);
  }
  csv.write_header(header);
  std::vector<double> row(header.size());
  for (int t = 0; t < series.values.cols(); ++t) {
    row[0] = series.times[t];
    for (int i = 0; i < model.observed_count(); ++i) {
      row[1 + 2 * i] = series.values(i, t).real();
      row[2 + 2 * i] = series.values(i, t).imag();
    }
    csv.write_row(row);
  }
  csv.close();

  RunManifest manifest;
  manifest.command = "observe";
  manifest.config_hash = cfg.hash;
  manifest.seed = seed;
  manifest.rng_id = PortableRng::id();
  manifest.grid_desc = grid_desc(cfg);
  record_output(&manifest, out_dir, "observations.csv");
  manifest.summary["observed_count"] = model.observed_count();
  manifest.summary["noise_amplitude"] = cfg.noise_amplitude;
  manifest.notes["noise_law"] = series.noise_law;
  manifest.wall_seconds = timer.seconds();
  write_manifest(out_dir, manifest);
}

AssimilateSummary cmd_assimilate(const ExperimentConfig& cfg, const std::string& obs_dir,
                                 const std::string& truth_dir,
                                 const std::string& out_dir) {
  WallTimer timer;
  const RunManifest upstream = read_manifest(obs_dir, "observe");
  if (upstream.config_hash != cfg.hash) {
    throw ValidationError("observations were produced under config hash " +
                          upstream.config_hash + ", current config is " + cfg.hash +
                          "; refusing to mix runs");
  }
  verify_manifest_file(obs_dir, upstream, "observations.csv");

  fs::create_directories(out_dir);
  const ModeGrid grid = cfg.make_grid();
  const ForcingSpec forcing = cfg.make_forcing(grid);
  const ObservationModel model = cfg.make_observation(grid);
  const ObservationSeries series =
      load_observations_csv(obs_dir + "/observations.csv", model.observed_count());

  Trajectory truth;
  const bool twin = !truth_dir.empty();
  if (twin) {
    const RunManifest truth_manifest = read_manifest(truth_dir, "simulate");
    if (truth_manifest.config_hash != cfg.hash) {
      throw ValidationError("truth outputs do not match the current config hash");
    }
    verify_manifest_file(truth_dir, truth_manifest, "truth.csv");
    truth = load_trajectory_csv(truth_dir + "/truth.csv", grid);
  }

  const double q_model_value = cfg.resolve_q_model(forcing);
  const double q = cfg.resolve_q(q_model_value);

  FilterSettings settings;
  settings.nu = cfg.viscosity;
  settings.q = q;
  settings.q_solve_slack = cfg.q_solve_slack;
  settings.q_model = PdSpec::scaled_identity(q_model_value, grid.size());
  settings.d_diag = forcing.d_diagonal;
  settings.gain_refresh_stride = cfg.gain_refresh_stride;
  settings.diagnostics_stride = cfg.diagnostics_stride;
  settings.gmres = gmres_options(cfg);
  settings.spectrum.dense_threshold = cfg.dense_spectrum_threshold;
  settings.spectrum.lanczos.max_dim = cfg.lanczos_max_dim;
  settings.spectrum.lanczos.rel_tol = cfg.lanczos_tol;
  if (twin) settings.truth = &truth;

  const FilterRun run = run_filter(series, model, grid, settings);

  const ErrorBoundParams bound = error_bound_params(
      q, cfg.viscosity, grid, PdSpec::scaled_identity(cfg.s_scale, grid.size()));

  {
    CsvWriter csv(out_dir + "/error.csv");
    csv.write_header({"t", "sigma", "rel_full", "rel_obs", "bound", "det_max",
                      "det_unobs", "det_pass", "lmi_max", "lmi_holds", "gain_residual",
                      "resym_correction"});
    for (int t = 0; t < run.step_count(); ++t) {
      csv.write_row({run.times[t], run.sigma[t], run.rel_full[t], run.rel_obs[t],
                     error_bound(bound, run.times[t]), run.det_max[t], run.det_unobs[t],
                     static_cast<double>(run.det_pass[t]), run.lmi_max[t],
                     static_cast<double>(run.lmi_holds[t]), run.gain_residual[t],
                     run.resym_correction[t]});
    }
    csv.close();
  }

  RunManifest manifest;
  manifest.command = "assimilate";
  manifest.config_hash = cfg.hash;
  manifest.seed = upstream.seed;
  manifest.rng_id = PortableRng::id();
  manifest.grid_desc = grid_desc(cfg);
  record_output(&manifest, out_dir, "error.csv");

  for (double st : cfg.snapshot_times) {
    const int idx = static_cast<int>(std::llround(st / cfg.dt));
    if (idx >= static_cast<int>(run.estimates.size())) continue;
    const Eigen::MatrixXd field =
        evaluate_field(run.estimates[idx], grid, cfg.field_resolution);
    const std::string name = snapshot_name("estimate_field", st);
    write_field_csv(out_dir + "/" + name, field);
    record_output(&manifest, out_dir, name);
  }

  if (cfg.write_estimate_states) {
    Trajectory est;
    est.times = run.times.head(run.estimates.size());
    est.states = run.estimates;
    write_trajectory_csv(out_dir + "/estimate.csv", est);
    record_output(&manifest, out_dir, "estimate.csv");
  }

  AssimilateSummary summary;
  summary.twin = twin;
  summary.failed = run.failed;
  summary.failure = run.failure;
  int det_evaluated = 0, det_passed = 0, lmi_evaluated = 0, lmi_held = 0;
  for (int t = 0; t < run.step_count(); ++t) {
    if (run.det_pass[t] >= 0) {
      ++det_evaluated;
      det_passed += run.det_pass[t];
    }
    if (run.lmi_holds[t] >= 0) {
      ++lmi_evaluated;
      lmi_held += run.lmi_holds[t];
    }
  }
  summary.det_pass_fraction =
      det_evaluated ? static_cast<double>(det_passed) / det_evaluated : 0.0;
  summary.lmi_holds_fraction =
      lmi_evaluated ? static_cast<double>(lmi_held) / lmi_evaluated : 0.0;
  if (twin && !run.estimates.empty()) {
    const int last = static_cast<int>(run.estimates.size()) - 1;
    summary.final_rel_full = run.rel_full[last];
    const double tail_start = 0.5 * cfg.t_final;
    for (int t = 0; t <= last; ++t) {
      if (run.times[t] >= tail_start) {
        summary.worst_rel_tail = std::max(summary.worst_rel_tail, run.rel_full[t]);
      }
    }
  }

  manifest.summary["q"] = q;
  manifest.summary["q_model"] = q_model_value;
  manifest.summary["failed"] = run.failed ? 1.0 : 0.0;
  manifest.summary["det_pass_fraction"] = summary.det_pass_fraction;
  manifest.summary["lmi_holds_fraction"] = summary.lmi_holds_fraction;
  manifest.summary["max_resym_correction"] = run.max_correction;
  if (twin) {
    manifest.summary["final_rel_full"] = summary.final_rel_full;
    manifest.summary["worst_rel_tail"] = summary.worst_rel_tail;
  }
  manifest.notes["gain_method"] = run.gain_method;
  if (run.failed) manifest.notes["failure"] = run.failure;
  manifest.wall_seconds = timer.seconds();
  write_manifest(out_dir, manifest);

  std::printf("assimilate: %s det_pass=%.1f%% lmi_holds=%.1f%%%s\n",
              twin ? ("final_rel=" + compact_number(summary.final_rel_full)).c_str()
                   : "(no truth supplied)",
              100.0 * summary.det_pass_fraction, 100.0 * summary.lmi_holds_fraction,
              run.failed ? " FAILED" : "");

  if (run.failed) {
    throw NumericalError("assimilation aborted at " + run.failure +
                         " (partial outputs written to " + out_dir + ")");
  }
  return summary;
}

void cmd_sweep(const std::string& config_text, const std::string& param_pointer,
               const std::vector<double>& values, const std::string& out_dir) {
  if (values.empty()) throw ValidationError("sweep needs at least one value");
  nlohmann::json base;
  try {
    base = nlohmann::json::parse(config_text);
  } catch (const nlohmann::json::parse_error& err) {
    throw ValidationError(std::string("config: not valid JSON: ") + err.what());
  }
  const ExperimentConfig base_cfg = parse_config_text(config_text);

  nlohmann::json::json_pointer ptr;
  try {
    ptr = nlohmann::json::json_pointer(param_pointer);
  } catch (const nlohmann::json::parse_error&) {
    throw ValidationError("sweep parameter must be a JSON pointer like "
                          "/observation/noise_amplitude");
  }
  if (!base.contains(ptr)) {
    throw ValidationError("sweep parameter " + param_pointer +
                          " is not present in the config");
  }
  const bool integral = base.at(ptr).is_number_integer();

  WallTimer timer;
  fs::create_directories(out_dir);
  CsvWriter csv(out_dir + "/sweep_summary.csv");
  csv.write_header({"value", "final_rel_full", "worst_rel_tail", "det_pass_fraction",
                    "lmi_holds_fraction", "failed"});

  for (double v : values) {
    nlohmann::json patched = base;
    if (integral) {
      patched[ptr] = static_cast<std::int64_t>(std::llround(v));
    } else {
      patched[ptr] = v;
    }
    const ExperimentConfig cfg = parse_config_text(patched.dump());

    std::string tag = compact_number(v);
    for (char& c : tag) {
      if (c == '.') c = 'p';
      if (c == '-') c = 'm';
    }
    const std::string sub = out_dir + "/value_" + tag;
    AssimilateSummary summary;
    try {
      cmd_simulate(cfg, sub + "/truth");
      cmd_observe(cfg, sub + "/truth", sub + "/obs");
      summary = cmd_assimilate(cfg, sub + "/obs", sub + "/truth", sub + "/run");
    } catch (const NumericalError&) {
      // A diverging run is a legitimate sweep outcome; record it and move on.
      summary.failed = true;
    }
    csv.write_row({v, summary.final_rel_full, summary.worst_rel_tail,
                   summary.det_pass_fraction, summary.lmi_holds_fraction,
                   summary.failed ? 1.0 : 0.0});
  }
  csv.close();

  RunManifest manifest;
  manifest.command = "sweep";
  manifest.config_hash = base_cfg.hash;
  manifest.seed = base_cfg.seed;
  manifest.rng_id = PortableRng::id();
  manifest.grid_desc = grid_desc(base_cfg);
  record_output(&manifest, out_dir, "sweep_summary.csv");
  manifest.notes["parameter"] = param_pointer;
  manifest.summary["value_count"] = static_cast<double>(values.size());
  manifest.wall_seconds = timer.seconds();
  write_manifest(out_dir, manifest);
}

}  // namespace fgda
