#include "fgda/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fgda/errors.hpp"
#include "fgda/manifest.hpp"
#include "fgda/transforms.hpp"

namespace fgda {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) { throw ValidationError("config: " + msg); }

const json& need(const json& obj, const char* section, const char* key) {
  if (!obj.contains(key)) {
    bad(std::string(section) + "." + key + " is required");
  }
  return obj.at(key);
}

void check_keys(const json& obj, const std::string& section,
                const std::set<std::string>& allowed) {
  if (!obj.is_object()) bad(section + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) bad("unknown key " + section + "." + key);
  }
}

double need_number(const json& obj, const char* section, const char* key) {
  const json& v = need(obj, section, key);
  if (!v.is_number()) bad(std::string(section) + "." + key + " must be a number");
  return v.get<double>();
}

int need_int(const json& obj, const char* section, const char* key) {
  const json& v = need(obj, section, key);
  if (!v.is_number_integer()) bad(std::string(section) + "." + key + " must be an integer");
  return v.get<int>();
}

std::string need_string(const json& obj, const char* section, const char* key) {
  const json& v = need(obj, section, key);
  if (!v.is_string()) bad(std::string(section) + "." + key + " must be a string");
  return v.get<std::string>();
}

ScalarRule parse_rule(const json& obj, const std::string& section) {
  check_keys(obj, section, {"type", "value", "factor"});
  ScalarRule rule;
  const std::string type = need_string(obj, section.c_str(), "type");
  if (type == "explicit") {
    rule.kind = ScalarRule::Kind::kExplicit;
    rule.value = need_number(obj, section.c_str(), "value");
    if (!(rule.value > 0.0)) bad(section + ".value must be positive");
  } else if (type == "forcing_norm_scaled") {
    rule.kind = ScalarRule::Kind::kForcingNormScaled;
    rule.value = need_number(obj, section.c_str(), "factor");
    if (!(rule.value > 0.0)) bad(section + ".factor must be positive");
  } else if (type == "forcing_max_scaled") {
    rule.kind = ScalarRule::Kind::kForcingMaxScaled;
    rule.value = need_number(obj, section.c_str(), "factor");
    if (!(rule.value > 0.0)) bad(section + ".factor must be positive");
  } else if (type == "model_bound_scaled") {
    rule.kind = ScalarRule::Kind::kModelBoundScaled;
    rule.value = need_number(obj, section.c_str(), "factor");
    if (!(rule.value > 0.0)) bad(section + ".factor must be positive");
  } else {
    bad(section + ".type \"" + type + "\" is not one of explicit, "
        "forcing_norm_scaled, forcing_max_scaled, model_bound_scaled");
  }
  return rule;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& err) {
    bad(std::string("not valid JSON: ") + err.what());
  }
  check_keys(root, "config",
             {"grid", "dynamics", "forcing", "observation", "estimator", "solver",
              "output"});

  ExperimentConfig cfg;

  const json& grid = need(root, "config", "grid");
  check_keys(grid, "grid", {"n1", "n2", "lx", "ly"});
  cfg.n1 = need_int(grid, "grid", "n1");
  cfg.n2 = need_int(grid, "grid", "n2");
  cfg.lx = need_number(grid, "grid", "lx");
  cfg.ly = need_number(grid, "grid", "ly");

  const json& dyn = need(root, "config", "dynamics");
  check_keys(dyn, "dynamics", {"viscosity", "dt", "t_final", "initial_condition"});
  cfg.viscosity = need_number(dyn, "dynamics", "viscosity");
  cfg.dt = need_number(dyn, "dynamics", "dt");
  cfg.t_final = need_number(dyn, "dynamics", "t_final");
  cfg.initial_condition = need_string(dyn, "dynamics", "initial_condition");
  if (cfg.initial_condition != "blobs" && cfg.initial_condition != "zero") {
    bad("dynamics.initial_condition must be \"blobs\" or \"zero\"");
  }
  if (!(cfg.dt > 0.0)) bad("dynamics.dt must be positive");
  if (!(cfg.t_final > 0.0)) bad("dynamics.t_final must be positive");
  if (!(cfg.viscosity > 0.0)) bad("dynamics.viscosity must be positive");

  const json& forcing = need(root, "config", "forcing");
  check_keys(forcing, "forcing", {"type", "offset"});
  cfg.forcing_type = need_string(forcing, "forcing", "type");
  if (cfg.forcing_type == "paired_mode") {
    cfg.forcing_offset = need_int(forcing, "forcing", "offset");
  } else if (cfg.forcing_type != "none") {
    bad("forcing.type must be \"paired_mode\" or \"none\"");
  }

  const json& obs = need(root, "config", "observation");
  check_keys(obs, "observation",
             {"type", "mode_offsets", "kernel_points", "noise_amplitude", "seed",
              "literal_noise_interval", "noise_matrix"});
  cfg.observation_type = need_string(obs, "observation", "type");
  if (cfg.observation_type == "selection") {
    const json& offs = need(obs, "observation", "mode_offsets");
    if (!offs.is_array() || offs.empty()) {
      bad("observation.mode_offsets must be a nonempty array");
    }
    for (const auto& v : offs) {
      if (!v.is_number_integer()) bad("observation.mode_offsets must hold integers");
      cfg.mode_offsets.push_back(v.get<int>());
    }
  } else if (cfg.observation_type == "kernel") {
    const json& pts = need(obs, "observation", "kernel_points");
    if (!pts.is_array() || pts.empty()) {
      bad("observation.kernel_points must be a nonempty array");
    }
    for (const auto& v : pts) {
      if (!v.is_array() || v.size() != 2) {
        bad("observation.kernel_points entries must be [x, y] pairs");
      }
      cfg.kernel_points.emplace_back(v[0].get<double>(), v[1].get<double>());
    }
  } else {
    bad("observation.type must be \"selection\" or \"kernel\"");
  }
  cfg.noise_amplitude = need_number(obs, "observation", "noise_amplitude");
  if (cfg.noise_amplitude < 0.0) bad("observation.noise_amplitude must be >= 0");
  const json& seed = need(obs, "observation", "seed");
  if (!seed.is_number_unsigned()) bad("observation.seed must be a nonnegative integer");
  cfg.seed = seed.get<std::uint64_t>();
  if (obs.contains("literal_noise_interval")) {
    cfg.literal_noise_interval = obs.at("literal_noise_interval").get<bool>();
  }
  if (obs.contains("noise_matrix")) {
    cfg.noise_matrix = obs.at("noise_matrix").get<std::string>();
    if (cfg.noise_matrix != "identity" && cfg.noise_matrix != "none") {
      bad("observation.noise_matrix must be \"identity\" or \"none\"");
    }
  }

  const json& est = need(root, "config", "estimator");
  check_keys(est, "estimator",
             {"q_model_rule", "q_rule", "s_scale", "q_solve_slack",
              "gain_refresh_stride", "diagnostics_stride", "dense_spectrum_threshold",
              "lanczos_max_dim", "lanczos_tol"});
  cfg.q_model_rule = parse_rule(need(est, "config", "q_model_rule"), "estimator.q_model_rule");
  cfg.q_rule = parse_rule(need(est, "config", "q_rule"), "estimator.q_rule");
  if (cfg.q_rule.kind == ScalarRule::Kind::kForcingNormScaled ||
      cfg.q_rule.kind == ScalarRule::Kind::kForcingMaxScaled) {
    bad("estimator.q_rule scales from the model bound or an explicit value, "
        "not the forcing");
  }
  cfg.s_scale = need_number(est, "estimator", "s_scale");
  if (!(cfg.s_scale > 0.0)) bad("estimator.s_scale must be positive");
  if (est.contains("q_solve_slack")) {
    cfg.q_solve_slack = est.at("q_solve_slack").get<double>();
    if (cfg.q_solve_slack < 0.0) bad("estimator.q_solve_slack must be >= 0");
  }
  if (est.contains("gain_refresh_stride")) {
    cfg.gain_refresh_stride = est.at("gain_refresh_stride").get<int>();
  }
  if (est.contains("diagnostics_stride")) {
    cfg.diagnostics_stride = est.at("diagnostics_stride").get<int>();
  }
  if (est.contains("dense_spectrum_threshold")) {
    cfg.dense_spectrum_threshold = est.at("dense_spectrum_threshold").get<int>();
  }
  if (est.contains("lanczos_max_dim")) {
    cfg.lanczos_max_dim = est.at("lanczos_max_dim").get<int>();
  }
  if (est.contains("lanczos_tol")) cfg.lanczos_tol = est.at("lanczos_tol").get<double>();
  if (cfg.gain_refresh_stride < 1 || cfg.diagnostics_stride < 1) {
    bad("estimator strides must be >= 1");
  }

  if (root.contains("solver")) {
    const json& solver = root.at("solver");
    check_keys(solver, "solver", {"gmres_tol", "gmres_restart", "gmres_max_iters"});
    if (solver.contains("gmres_tol")) cfg.gmres_tol = solver.at("gmres_tol").get<double>();
    if (solver.contains("gmres_restart")) {
      cfg.gmres_restart = solver.at("gmres_restart").get<int>();
    }
    if (solver.contains("gmres_max_iters")) {
      cfg.gmres_max_iters = solver.at("gmres_max_iters").get<int>();
    }
    if (!(cfg.gmres_tol > 0.0) || cfg.gmres_restart < 1 || cfg.gmres_max_iters < 1) {
      bad("solver parameters out of range");
    }
  }

  if (root.contains("output")) {
    const json& out = root.at("output");
    check_keys(out, "output",
               {"snapshot_times", "field_resolution", "projection_resolution",
                "write_estimate_states"});
    if (out.contains("snapshot_times")) {
      for (const auto& v : out.at("snapshot_times")) {
        cfg.snapshot_times.push_back(v.get<double>());
      }
    }
    if (out.contains("field_resolution")) {
      cfg.field_resolution = out.at("field_resolution").get<int>();
    }
    if (out.contains("projection_resolution")) {
      cfg.projection_resolution = out.at("projection_resolution").get<int>();
    }
    if (out.contains("write_estimate_states")) {
      cfg.write_estimate_states = out.at("write_estimate_states").get<bool>();
    }
  }

  // Cross-field checks that need the grid.
  const ModeGrid mode_grid = cfg.make_grid();
  const int min_res = std::max(cfg.n1, cfg.n2) + 1;
  if (cfg.field_resolution < min_res || cfg.projection_resolution < min_res) {
    bad("output resolutions must be >= max(n1,n2)+1");
  }
  if (cfg.step_count() < 1) bad("t_final must cover at least one step of dt");
  for (double t : cfg.snapshot_times) {
    if (t < 0.0 || t > cfg.t_final + 1e-12) bad("snapshot time outside [0, t_final]");
  }
  if (cfg.forcing_type == "none" &&
      cfg.q_model_rule.kind == ScalarRule::Kind::kForcingNormScaled) {
    bad("q_model_rule needs a forcing amplitude but forcing.type is \"none\"");
  }
  cfg.make_observation(mode_grid);  // validates the observed set

  cfg.canonical_json = root.dump();
  cfg.hash = fnv1a64_hex(cfg.canonical_json);
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

ModeGrid ExperimentConfig::make_grid() const { return ModeGrid(n1, n2, lx, ly); }

ForcingSpec ExperimentConfig::make_forcing(const ModeGrid& grid) const {
  if (forcing_type == "none") return no_forcing(grid);
  return paired_mode_forcing(grid, forcing_offset);
}

SpectralVorticity ExperimentConfig::make_initial_state(const ModeGrid& grid) const {
  if (initial_condition == "zero") return SpectralVorticity::Zero(grid.size());
  const int m = projection_resolution;
  Eigen::MatrixXd samples(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      samples(i, j) = default_initial_field(i * lx / m, j * ly / m, lx, ly);
    }
  }
  return project_physical_field(samples, grid);
}

ObservationModel ExperimentConfig::make_observation(const ModeGrid& grid) const {
  ObservationModel model = observation_type == "selection"
                               ? selection_observation(grid, mode_product(mode_offsets))
                               : kernel_observation(grid, kernel_points);
  if (noise_matrix == "identity" && noise_amplitude > 0.0) {
    model.noise_matrix =
        Eigen::MatrixXd::Identity(model.observed_count(), model.observed_count());
  }
  return model;
}

double ExperimentConfig::resolve_q_model(const ForcingSpec& forcing) const {
  switch (q_model_rule.kind) {
    case ScalarRule::Kind::kExplicit:
      return q_model_rule.value;
    case ScalarRule::Kind::kForcingNormScaled: {
      const double norm = forcing.amplitude_norm();
      if (!(norm > 0.0)) {
        throw ValidationError("config: forcing amplitude norm is zero");
      }
      return q_model_rule.value / norm;
    }
    case ScalarRule::Kind::kForcingMaxScaled: {
      const double amax = forcing.amplitude_max();
      if (!(amax > 0.0)) {
        throw ValidationError("config: forcing amplitude maximum is zero");
      }
      return q_model_rule.value / amax;
    }
    case ScalarRule::Kind::kModelBoundScaled:
      throw ValidationError("config: q_model_rule cannot reference itself");
  }
  throw ValidationError("config: unhandled q_model_rule");
}

double ExperimentConfig::resolve_q(double q_model_value) const {
  switch (q_rule.kind) {
    case ScalarRule::Kind::kExplicit:
      return q_rule.value;
    case ScalarRule::Kind::kModelBoundScaled:
      return q_rule.value * q_model_value;
    case ScalarRule::Kind::kForcingNormScaled:
    case ScalarRule::Kind::kForcingMaxScaled:
      throw ValidationError("config: q_rule scales from the model bound or an "
                            "explicit value, not the forcing");
  }
  throw ValidationError("config: unhandled q_rule");
}

int ExperimentConfig::step_count() const {
  return static_cast<int>(std::llround(t_final / dt));
}

}  // namespace fgda
