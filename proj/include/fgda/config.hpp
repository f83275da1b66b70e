#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fgda/dynamics.hpp"
#include "fgda/mode_grid.hpp"
#include "fgda/observation.hpp"

namespace fgda {

// How a scalar model parameter is obtained.  Physical scalars are never
// defaulted: each rule comes from the config explicitly.
struct ScalarRule {
  enum class Kind {
    kExplicit,            // value
    kForcingNormScaled,   // factor / euclidean norm of the forcing amplitude
    kForcingMaxScaled,    // factor / largest forcing amplitude component
    kModelBoundScaled,    // factor * max eigenvalue of the model bound Q
  };
  Kind kind = Kind::kExplicit;
  double value = 0.0;  // explicit value, or the factor for derived rules
};

// Validated experiment description.  Physical parameters are all required in
// the JSON; infrastructure knobs (solver tolerances, strides, output
// resolutions) carry defaults.  The canonical serialization and its hash make
// runs self-identifying: every manifest embeds the hash and downstream
// commands refuse inputs produced under a different configuration.
struct ExperimentConfig {
  // grid
  int n1 = 0, n2 = 0;
  double lx = 0.0, ly = 0.0;
  // dynamics
  double viscosity = 0.0, dt = 0.0, t_final = 0.0;
  std::string initial_condition;  // "blobs" | "zero"
  // forcing
  std::string forcing_type;  // "paired_mode" | "none"
  int forcing_offset = 0;
  // observation
  std::string observation_type;  // "selection" | "kernel"
  std::vector<int> mode_offsets;
  std::vector<std::pair<double, double>> kernel_points;
  double noise_amplitude = 0.0;
  std::uint64_t seed = 0;
  bool literal_noise_interval = false;
  std::string noise_matrix = "identity";  // "identity" | "none"
  // estimator
  ScalarRule q_model_rule;  // scale of Q
  ScalarRule q_rule;        // level q
  double s_scale = 0.0;     // S = s_scale * I
  double q_solve_slack = 1e-6;
  int gain_refresh_stride = 1;
  int diagnostics_stride = 1;
  int dense_spectrum_threshold = 700;
  int lanczos_max_dim = 120;
  double lanczos_tol = 1e-8;
  // solver
  double gmres_tol = 1e-10;
  int gmres_restart = 80;
  int gmres_max_iters = 2000;
  // output
  std::vector<double> snapshot_times;
  int field_resolution = 128;
  int projection_resolution = 256;
  bool write_estimate_states = false;

  std::string canonical_json;
  std::string hash;

  ModeGrid make_grid() const;
  ForcingSpec make_forcing(const ModeGrid& grid) const;
  SpectralVorticity make_initial_state(const ModeGrid& grid) const;
  ObservationModel make_observation(const ModeGrid& grid) const;
  // Scalar value of the model uncertainty bound Q.
  double resolve_q_model(const ForcingSpec& forcing) const;
  // Level q, possibly derived from the resolved Q.
  double resolve_q(double q_model_value) const;
  int step_count() const;
};

ExperimentConfig parse_config_text(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);

}  // namespace fgda
