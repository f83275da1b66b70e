#include "fgda/verify.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <json.hpp>

#include "fgda/dynamics.hpp"
#include "fgda/errors.hpp"
#include "fgda/estimator.hpp"
#include "fgda/observation.hpp"
#include "fgda/operators.hpp"
#include "fgda/reference_kernels.hpp"
#include "fgda/rng.hpp"
#include "fgda/solvers.hpp"
#include "fgda/state.hpp"
#include "fgda/transforms.hpp"

namespace fgda {

namespace {

SuiteResult make_result(const std::string& name, double worst, double tol,
                        const std::string& detail) {
  SuiteResult r;
  r.name = name;
  r.worst = worst;
  r.tolerance = tol;
  r.passed = worst <= tol;
  r.detail = detail;
  return r;
}

double max_abs_entry(const SparseCx& m) {
  double worst = 0.0;
  for (int k = 0; k < m.nonZeros(); ++k) {
    worst = std::max(worst, std::abs(m.valuePtr()[k]));
  }
  return worst;
}

double max_abs_diff(const SparseCx& a, const SparseCx& b) {
  SparseCx d = a - b;
  return max_abs_entry(d);
}

// Dense residual of the gain equation for a selection or dense H^*H.
Eigen::MatrixXcd gain_residual_dense(const Eigen::MatrixXcd& p,
                                     const Eigen::MatrixXcd& g,
                                     const Eigen::MatrixXcd& w) {
  return p * g + g * p - w;
}

SuiteResult suite_mode_indexing(const ModeGrid& grid) {
  int worst = 0;
  for (int c = -grid.half1(); c <= grid.half1(); ++c) {
    for (int d = -grid.half2(); d <= grid.half2(); ++d) {
      const int k = grid.lin(c, d);
      const auto [cc, dd] = grid.mode(k);
      worst = std::max({worst, std::abs(cc - c), std::abs(dd - d)});
      worst = std::max(worst, std::abs(grid.mirror(k) - grid.lin(-c, -d)));
    }
  }
  worst = std::max(worst, std::abs(grid.lin(0, 0) - grid.center()));
  worst = std::max(worst, std::abs(2 * grid.center() - (grid.size() - 1)));
  return make_result("mode-indexing", worst, 0.0,
                     "linear index round trip, mirror pairing, centered mean mode");
}

SuiteResult suite_convection_structure(const ModeGrid& grid, PortableRng& rng,
                                       bool mutate) {
  double worst = 0.0;
  double scale = 1.0;
  for (int trial = 0; trial < 4; ++trial) {
    const SpectralVorticity w = random_valid_state(grid, rng);
    SparseCx b = assemble_convection(w, grid);
    if (mutate && b.nonZeros() > 0) {
      b.valuePtr()[0] = -b.valuePtr()[0];
    }
    scale = std::max(scale, max_abs_entry(b));

    SparseCx bh = SparseCx(b.adjoint());
    worst = std::max(worst, max_abs_diff(b, SparseCx(-bh)));

    int center_hits = 0;
    for (int row = 0; row < b.outerSize(); ++row) {
      for (SparseCx::InnerIterator it(b, row); it; ++it) {
        if (it.row() == grid.center() || it.col() == grid.center()) ++center_hits;
      }
    }
    worst = std::max(worst, static_cast<double>(center_hits));

    Eigen::VectorXcd bw(grid.size());
    sparse_apply(b, w, bw);
    const double denom = std::max(1.0, w.norm() * bw.norm());
    worst = std::max(worst, std::abs(w.dot(bw).real()) / denom);
  }
  return make_result("convection-structure", worst, 1e-12 * scale,
                     "skew-hermiticity, empty mean row/column, energy neutrality");
}

SuiteResult suite_kernel_parity(const ModeGrid& grid, PortableRng& rng) {
  double worst = 0.0;
  double scale = 1.0;
  for (int trial = 0; trial < 3; ++trial) {
    const SpectralVorticity w = random_valid_state(grid, rng);
    const SparseCx b_fast = assemble_convection(w, grid);
    const SparseCx b_ref = reference::assemble_convection(w, grid);
    worst = std::max(worst, max_abs_diff(b_fast, b_ref));
    scale = std::max(scale, max_abs_entry(b_ref));

    const SparseCx l_fast = assemble_linearized_convection(w, grid);
    const SparseCx l_ref = reference::assemble_linearized_convection(w, grid);
    worst = std::max(worst, max_abs_diff(l_fast, l_ref));

    const SpectralVorticity v = random_valid_state(grid, rng);
    Eigen::VectorXcd y_fast(grid.size()), y_ref(grid.size());
    sparse_apply(b_fast, v, y_fast);
    reference::sparse_apply(b_ref, v, y_ref);
    worst = std::max(worst, (y_fast - y_ref).cwiseAbs().maxCoeff());
  }
  return make_result("kernel-parity", worst, 1e-12 * scale,
                     "parallel assembly and apply match the serial references");
}

SuiteResult suite_linearization_identity(const ModeGrid& grid, PortableRng& rng) {
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const SpectralVorticity what = random_valid_state(grid, rng);
    const SpectralVorticity v = random_valid_state(grid, rng);
    const SparseCx b1 = assemble_linearized_convection(what, grid);
    const SparseCx bv = assemble_convection(v, grid);
    Eigen::VectorXcd lhs(grid.size()), rhs(grid.size());
    sparse_apply(b1, v, lhs);
    sparse_apply(bv, what, rhs);
    const double denom = std::max(1.0, rhs.norm());
    worst = std::max(worst, (lhs - rhs).norm() / denom);

    int structural = 0;
    for (int row = 0; row < b1.outerSize(); ++row) {
      for (SparseCx::InnerIterator it(b1, row); it; ++it) {
        if (it.row() == it.col() || it.col() == grid.center()) ++structural;
      }
    }
    worst = std::max(worst, static_cast<double>(structural));
  }
  return make_result("linearization-identity", worst, 1e-12,
                     "linearized(w)v == B(v)w on mean-free states; empty "
                     "diagonal and mean column");
}

SuiteResult suite_conjugacy_projector(const ModeGrid& grid) {
  const int n = grid.size();
  const Eigen::MatrixXd psi = conjugacy_projector(n);
  double worst = (psi - psi.transpose()).cwiseAbs().maxCoeff();
  Eigen::MatrixXd expected = Eigen::MatrixXd::Identity(n, n);
  expected(grid.center(), grid.center()) = 0.0;
  worst = std::max(worst, (psi * psi - expected).cwiseAbs().maxCoeff());
  return make_result("conjugacy-projector", worst, 1e-14,
                     "Psi symmetric with Psi^2 the mean-free projector");
}

SuiteResult suite_transform_roundtrip(const ModeGrid& grid, PortableRng& rng) {
  const int resolution = 3 * std::max(grid.half1(), grid.half2()) + 1;
  double worst = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    const SpectralVorticity w = random_valid_state(grid, rng);
    const Eigen::MatrixXd field = evaluate_field(w, grid, resolution);
    const SpectralVorticity w2 = project_physical_field(field, grid);
    worst = std::max(worst, (w - w2).cwiseAbs().maxCoeff() /
                                std::max(1.0, w.cwiseAbs().maxCoeff()));

    const double mean_square = field.squaredNorm() /
                               (static_cast<double>(resolution) * resolution);
    const double coeff_square = w.squaredNorm();
    worst = std::max(worst,
                     std::abs(mean_square - coeff_square) / std::max(1.0, coeff_square));
  }
  return make_result("transform-roundtrip", worst, 1e-10,
                     "project(evaluate(w)) == w and the discrete Parseval sum");
}

SuiteResult suite_enstrophy_laws(const ModeGrid& grid, PortableRng& rng) {
  GmresOptions opts;
  opts.rel_tol = 1e-11;

  SpectralVorticity w = random_valid_state(grid, rng, 0.3);
  const double e0 = enstrophy(w);
  double worst = 0.0;
  const double dt = 0.05;
  const Eigen::VectorXcd zero_f = Eigen::VectorXcd::Zero(grid.size());
  for (int step = 0; step < 20; ++step) {
    const SparseCx b = assemble_convection(w, grid);
    const LinOp op = [&b](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
      sparse_apply(b, x, y);
    };
    w = midpoint_step(w, op, zero_f, dt, opts, nullptr, "enstrophy conservation");
    enforce_conjugate_symmetry(w, grid);
    worst = std::max(worst, std::abs(enstrophy(w) - e0) / e0);
  }

  const SpectralVorticity w0 = random_valid_state(grid, rng, 0.3);
  const Trajectory traj =
      simulate_truth(w0, no_forcing(grid), 0.1, grid, 0.05, 1.0, opts);
  for (std::size_t s = 1; s < traj.states.size(); ++s) {
    const double increase =
        enstrophy(traj.states[s]) - enstrophy(traj.states[s - 1]);
    worst = std::max(worst, increase / enstrophy(traj.states.front()));
  }
  return make_result("enstrophy-laws", worst, 1e-8,
                     "convection alone conserves enstrophy, diffusion dissipates it");
}

// Minimum-norm least-squares gain from an explicit SVD pseudoinverse of the
// Kronecker form of P -> P G + G P.  Completely independent construction
// route; cubic in N^2, so callers keep the grid tiny.
Eigen::MatrixXcd gain_by_pseudoinverse(const Eigen::MatrixXcd& g,
                                       const Eigen::MatrixXcd& w) {
  const int n = static_cast<int>(g.rows());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n * n, n * n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const Cplx gt = g(b, a);  // (G^T ⊗ I) block scale
      if (gt != Cplx(0.0, 0.0)) {
        for (int i = 0; i < n; ++i) m(a * n + i, b * n + i) += gt;
      }
    }
  }
  for (int a = 0; a < n; ++a) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        m(a * n + i, a * n + j) += g(i, j);  // (I ⊗ G) block
      }
    }
  }
  Eigen::VectorXcd rhs(n * n);
  for (int col = 0; col < n; ++col) rhs.segment(col * n, n) = w.col(col);

  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = 1e-12 * sv.maxCoeff();
  Eigen::VectorXcd coeffs = svd.matrixU().adjoint() * rhs;
  for (int k = 0; k < sv.size(); ++k) {
    coeffs[k] = sv[k] > cutoff ? coeffs[k] / sv[k] : Cplx(0.0, 0.0);
  }
  const Eigen::VectorXcd x = svd.matrixV() * coeffs;
  Eigen::MatrixXcd p(n, n);
  for (int col = 0; col < n; ++col) p.col(col) = x.segment(col * n, n);
  return p;
}

SuiteResult suite_gain_least_squares(const ModeGrid& grid, PortableRng& rng) {
  double worst = 0.0;
  std::string detail = "structured == iterative == pseudoinverse; perturbations "
                       "cannot lower the residual";

  // Structured vs iterative on the verification grid.
  const ObservationModel obs = selection_observation(grid, mode_product({0, 1}));
  const SpectralVorticity what = random_valid_state(grid, rng, 0.5);
  const ForcingSpec forcing = no_forcing(grid);
  const PdSpec q_model = PdSpec::scaled_identity(0.7, grid.size());
  const double q = 1.3;
  const GainProblem problem =
      assemble_gain_problem(what, forcing.d_diagonal, q_model, q, grid, obs);
  const Gain structured = solve_gain_structured(problem);
  const Gain iterative = solve_gain_iterative(problem, 1e-13, 4000);
  const Eigen::MatrixXcd ps = Eigen::MatrixXcd(structured.p);
  const Eigen::MatrixXcd pi = Eigen::MatrixXcd(iterative.p);
  const double p_scale = std::max(1.0, ps.cwiseAbs().maxCoeff());
  worst = std::max(worst, (ps - pi).cwiseAbs().maxCoeff() / p_scale);

  // Residual value: exactly the Frobenius norm of the unobserved block.
  const Eigen::MatrixXcd w_dense = Eigen::MatrixXcd(problem.w);
  const Eigen::VectorXd h = obs.hh_diagonal();
  double wuu2 = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    for (int j = 0; j < grid.size(); ++j) {
      if (h[i] + h[j] == 0.0) wuu2 += std::norm(w_dense(i, j));
    }
  }
  worst = std::max(worst, std::abs(structured.residual - std::sqrt(wuu2)) /
                              std::max(1.0, std::sqrt(wuu2)));

  // Optimality: random Hermitian perturbations supported on the solvable
  // pattern can only increase the residual.
  const Eigen::MatrixXcd g = h.cast<Cplx>().asDiagonal();
  const double res_star = gain_residual_dense(ps, g, w_dense).norm();
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(grid.size(), grid.size());
    for (int k = 0; k < 10; ++k) {
      const int i = static_cast<int>(rng.unit() * grid.size());
      const int j = static_cast<int>(rng.unit() * grid.size());
      if (i >= grid.size() || j >= grid.size() || h[i] + h[j] == 0.0) continue;
      const Cplx v(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
      e(i, j) += v;
      e(j, i) += std::conj(v);
    }
    const double res_perturbed =
        gain_residual_dense(ps + 1e-3 * e, g, w_dense).norm();
    worst = std::max(worst, (res_star - res_perturbed) / std::max(1.0, res_star));
  }

  // Pseudoinverse oracle on a small grid, selection and dense-row H alike.
  const ModeGrid small(4, 4, grid.lx(), grid.ly());
  const SpectralVorticity what_small = random_valid_state(small, rng, 0.5);
  {
    const ObservationModel obs_small = selection_observation(small, mode_product({0, 1}));
    const GainProblem prob_small = assemble_gain_problem(
        what_small, no_forcing(small).d_diagonal,
        PdSpec::scaled_identity(0.5, small.size()), 0.9, small, obs_small);
    const Gain st = solve_gain_structured(prob_small);
    const Eigen::MatrixXcd p_oracle = gain_by_pseudoinverse(
        obs_small.hh_dense(), Eigen::MatrixXcd(prob_small.w));
    worst = std::max(worst, (Eigen::MatrixXcd(st.p) - p_oracle).cwiseAbs().maxCoeff() /
                                std::max(1.0, p_oracle.cwiseAbs().maxCoeff()));
  }
  {
    const ObservationModel obs_kernel = kernel_observation(
        small, {{0.4, 0.9}, {2.0, 2.6}, {4.4, 1.2}, {1.1, 5.0}});
    const GainProblem prob_kernel = assemble_gain_problem(
        what_small, no_forcing(small).d_diagonal,
        PdSpec::scaled_identity(0.5, small.size()), 0.9, small, obs_kernel);
    const Gain it = solve_gain_iterative(prob_kernel, 1e-13, 20000);
    const Eigen::MatrixXcd p_oracle = gain_by_pseudoinverse(
        obs_kernel.hh_dense(), Eigen::MatrixXcd(prob_kernel.w));
    worst = std::max(worst, (Eigen::MatrixXcd(it.p) - p_oracle).cwiseAbs().maxCoeff() /
                                std::max(1.0, p_oracle.cwiseAbs().maxCoeff()));
  }

  return make_result("gain-least-squares", worst, 1e-7, detail);
}

SuiteResult suite_residual_structure(const ModeGrid& grid, PortableRng& rng) {
  const ObservationModel obs = selection_observation(grid, mode_product({0, 2}));
  const SpectralVorticity what = random_valid_state(grid, rng, 0.5);
  const GainProblem problem = assemble_gain_problem(
      what, no_forcing(grid).d_diagonal, PdSpec::scaled_identity(0.4, grid.size()),
      1.1, grid, obs);
  const Gain gain = solve_gain_structured(problem);
  const Eigen::MatrixXcd w = Eigen::MatrixXcd(problem.w);
  const Eigen::VectorXd h = obs.hh_diagonal();
  const Eigen::MatrixXcd g = h.cast<Cplx>().asDiagonal();
  const Eigen::MatrixXcd r = gain_residual_dense(Eigen::MatrixXcd(gain.p), g, w);

  const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
  double worst = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    for (int j = 0; j < grid.size(); ++j) {
      if (h[i] + h[j] > 0.0) {
        worst = std::max(worst, std::abs(r(i, j)));          // solvable: zero
      } else {
        worst = std::max(worst, std::abs(r(i, j) + w(i, j)));  // stuck: -W_uu
      }
    }
  }
  return make_result("residual-structure", worst / scale, 1e-13,
                     "least-squares residual is exactly -W on the unobserved block");
}

SuiteResult suite_integrator_order(PortableRng& rng) {
  const int n = 15;
  Eigen::MatrixXcd k(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      k(i, j) = Cplx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    }
  }
  Eigen::MatrixXcd m = 0.5 * (k - k.adjoint());
  for (int i = 0; i < n; ++i) m(i, i) += Cplx(-rng.unit(), 0.0);

  Eigen::VectorXcd x0(n);
  for (int i = 0; i < n; ++i) {
    x0[i] = Cplx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  }

  const double t_final = 0.4;
  const Eigen::MatrixXcd exact_map = (t_final * m).exp();
  const Eigen::VectorXcd exact = exact_map * x0;

  const LinOp op = [&m](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { y = m * x; };
  GmresOptions opts;
  opts.rel_tol = 1e-13;
  const Eigen::VectorXcd zero_f = Eigen::VectorXcd::Zero(n);

  auto run = [&](int steps) {
    Eigen::VectorXcd x = x0;
    const double dt = t_final / steps;
    for (int s = 0; s < steps; ++s) {
      x = midpoint_step(x, op, zero_f, dt, opts, nullptr, "order study");
    }
    return (x - exact).norm();
  };
  const double err_coarse = run(8);
  const double err_fine = run(16);
  const double ratio = err_coarse / err_fine;
  return make_result("integrator-order", std::abs(ratio - 4.0), 0.5,
                     "halving dt divides the error by " + std::to_string(ratio) +
                         " (second order gives 4)");
}

SuiteResult suite_error_bound_envelope(const ModeGrid& grid, PortableRng& rng) {
  (void)rng;
  // Fully observed, noise-free, force-free twin: every disturbance ellipsoid
  // is satisfied trivially, so the envelope must dominate the squared error.
  const int res = 4 * std::max(grid.half1(), grid.half2());
  Eigen::MatrixXd samples(res, res);
  for (int i = 0; i < res; ++i) {
    for (int j = 0; j < res; ++j) {
      samples(i, j) = default_initial_field(i * grid.lx() / res, j * grid.ly() / res,
                                            grid.lx(), grid.ly());
    }
  }
  SpectralVorticity w0 = project_physical_field(samples, grid);
  w0 *= 0.9 / w0.norm();

  GmresOptions opts;
  opts.rel_tol = 1e-11;
  const double dt = 0.02, t_final = 1.0, nu = 0.05, q = 1.0;
  const Trajectory traj =
      simulate_truth(w0, no_forcing(grid), nu, grid, dt, t_final, opts);

  std::vector<std::pair<int, int>> all_modes;
  for (int c = -grid.half1(); c <= grid.half1(); ++c) {
    for (int d = -grid.half2(); d <= grid.half2(); ++d) all_modes.push_back({c, d});
  }
  const ObservationModel obs = selection_observation(grid, all_modes);
  const ObservationSeries series =
      generate_observations(traj, obs, grid, 0.0, 7u, false);

  FilterSettings settings;
  settings.nu = nu;
  settings.q = q;
  settings.q_model = PdSpec::scaled_identity(1.0, grid.size());
  settings.d_diag = no_forcing(grid).d_diagonal;
  settings.diagnostics_stride = 5;
  settings.gmres = opts;
  settings.truth = &traj;
  const FilterRun run = run_filter(series, obs, grid, settings);
  if (run.failed) {
    return make_result("error-bound-envelope", std::numeric_limits<double>::infinity(),
                       0.0, "filter aborted: " + run.failure);
  }

  const ErrorBoundParams bound =
      error_bound_params(q, nu, grid, PdSpec::scaled_identity(1.0, grid.size()));
  double worst = 0.0;
  int lmi_checked = 0, lmi_failed = 0;
  for (int t = 0; t < run.step_count(); ++t) {
    worst = std::max(worst, run.sigma[t] - error_bound(bound, run.times[t]));
    if (run.lmi_holds[t] >= 0) {
      ++lmi_checked;
      lmi_failed += run.lmi_holds[t] == 0;
    }
  }
  if (lmi_checked == 0) lmi_failed = 1;
  worst = std::max(worst, static_cast<double>(lmi_failed));
  worst = std::max(worst, run.rel_full[run.step_count() - 1] -
                              0.9 * run.rel_full[0]);
  return make_result("error-bound-envelope", worst, 10.0 * dt,
                     "squared error under the envelope, algebraic inequality "
                     "holds, error contracts");
}

SuiteResult suite_forcing_pair(const ModeGrid& grid) {
  const int offset = 2;
  const ForcingSpec f = paired_mode_forcing(grid, offset);
  double worst = 0.0;
  int support = 0;
  for (int k = 0; k < grid.size(); ++k) {
    if (f.d_diagonal[k] != 0.0) {
      ++support;
      const auto [c, d] = grid.mode(k);
      worst = std::max(worst, static_cast<double>(std::abs(c)));
      worst = std::max(worst, static_cast<double>(std::abs(std::abs(d) - offset)));
      worst = std::max(worst, std::abs(f.d_diagonal[k] - 1.0));
    }
  }
  worst = std::max(worst, static_cast<double>(std::abs(support - 2)));
  worst = std::max(worst,
                   (f.amplitude.array() - Cplx(offset / 2.0, 0.0)).abs().maxCoeff());
  worst = std::max(worst, conjugate_symmetry_defect(f.df_at(0.0), grid));
  const double expected_norm = (offset / 2.0) * std::sqrt(grid.size());
  worst = std::max(worst, std::abs(f.amplitude_norm() - expected_norm) / expected_norm);
  return make_result("forcing-pair", worst, 1e-12,
                     "mask hits exactly the conjugate pair (0,±offset) with "
                     "amplitude offset/2");
}

SuiteResult suite_observation_noise(const ModeGrid& grid, PortableRng& rng) {
  const ObservationModel obs = selection_observation(grid, mode_product({0, 1}));
  SpectralVorticity w0 = random_valid_state(grid, rng, 0.5);
  Trajectory traj;
  traj.times = Eigen::VectorXd::LinSpaced(3, 0.0, 0.2);
  traj.states = {w0, w0, w0};

  const double amplitude = 0.25;
  const ObservationSeries a = generate_observations(traj, obs, grid, amplitude, 11u);
  const ObservationSeries b = generate_observations(traj, obs, grid, amplitude, 11u);
  const ObservationSeries c = generate_observations(traj, obs, grid, amplitude, 12u);

  double worst = (a.values - b.values).cwiseAbs().maxCoeff();
  const double spread = (a.values - c.values).cwiseAbs().maxCoeff();
  if (spread <= 0.0) worst = std::max(worst, 1.0);

  const double bound_per_part = amplitude / std::sqrt(static_cast<double>(grid.size()));
  for (int t = 0; t < a.values.cols(); ++t) {
    SpectralVorticity noisy = SpectralVorticity::Zero(grid.size());
    Eigen::VectorXcd eta = a.values.col(t) - obs.apply(traj.states[t]);
    for (int i = 0; i < obs.observed_count(); ++i) {
      // The mean row is its own conjugate partner: its noise must be real,
      // and it stays out of the pairing reconstruction below because a
      // mean-free state keeps that entry at zero.
      if (obs.selected[i] == grid.center()) {
        worst = std::max(worst, std::abs(eta[i].imag()));
      } else {
        noisy[obs.selected[i]] = a.values(i, t);
      }
      worst = std::max(worst, std::abs(eta[i].real()) - bound_per_part);
      worst = std::max(worst, std::abs(eta[i].imag()) - bound_per_part);
    }
    worst = std::max(worst, conjugate_symmetry_defect(noisy, grid));
  }
  return make_result("observation-noise", worst, 1e-13,
                     "seeded draws reproduce, noise stays in band and keeps "
                     "conjugate pairing");
}

}  // namespace

bool VerifyReport::all_passed() const {
  return std::all_of(suites.begin(), suites.end(),
                     [](const SuiteResult& s) { return s.passed; });
}

VerifyReport run_verification(const VerifyOptions& opts) {
  if (opts.grid_n < 4 || opts.grid_n % 2 != 0) {
    throw ValidationError("verification grid must be even and at least 4");
  }
  const ModeGrid grid(opts.grid_n, opts.grid_n, 2.0 * M_PI, 2.0 * M_PI);
  PortableRng rng(opts.seed);

  VerifyReport report;
  report.options = opts;
  report.suites.push_back(suite_mode_indexing(grid));
  report.suites.push_back(suite_convection_structure(grid, rng,
                                                     opts.mutate_convection_sign));
  report.suites.push_back(suite_kernel_parity(grid, rng));
  report.suites.push_back(suite_linearization_identity(grid, rng));
  report.suites.push_back(suite_conjugacy_projector(grid));
  report.suites.push_back(suite_transform_roundtrip(grid, rng));
  report.suites.push_back(suite_enstrophy_laws(grid, rng));
  report.suites.push_back(suite_gain_least_squares(grid, rng));
  report.suites.push_back(suite_residual_structure(grid, rng));
  report.suites.push_back(suite_integrator_order(rng));
  report.suites.push_back(suite_error_bound_envelope(grid, rng));
  report.suites.push_back(suite_forcing_pair(grid));
  report.suites.push_back(suite_observation_noise(grid, rng));
  return report;
}

void write_verify_report(const std::string& path, const VerifyReport& report) {
  nlohmann::json root;
  root["grid"] = std::to_string(report.options.grid_n) + "x" +
                 std::to_string(report.options.grid_n);
  root["seed"] = report.options.seed;
  root["all_passed"] = report.all_passed();
  nlohmann::json suites = nlohmann::json::array();
  for (const SuiteResult& s : report.suites) {
    nlohmann::json entry;
    entry["name"] = s.name;
    entry["passed"] = s.passed;
    entry["worst"] = s.worst;
    entry["tolerance"] = s.tolerance;
    entry["detail"] = s.detail;
    suites.push_back(entry);
  }
  root["suites"] = suites;
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << root.dump(2) << "\n";
  if (!out) throw ValidationError("failed while writing " + path);
}

}  // namespace fgda
