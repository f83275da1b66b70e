#include "fgda/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fgda/errors.hpp"
#include "fgda/operators.hpp"

namespace fgda {

namespace {

constexpr double kMarginFactor = 1e-8;

double frobenius(const SparseCx& m) {
  double acc = 0.0;
  const auto* vals = m.valuePtr();
  for (int i = 0; i < m.nonZeros(); ++i) acc += std::norm(vals[i]);
  return std::sqrt(acc);
}

// P diag(h) + diag(h) P for 0/1 diagonal h: every stored entry scales by
// h_row + h_col, keeping the sparsity pattern of P.
SparseCx scale_by_h_sums(const SparseCx& p, const Eigen::VectorXd& h) {
  SparseCx out = p;
  for (int r = 0; r < out.outerSize(); ++r) {
    for (SparseCx::InnerIterator it(out, r); it; ++it) {
      it.valueRef() *= h[r] + h[it.col()];
    }
  }
  return out;
}

// Rows and columns of m restricted to `keep` (sorted), with `shift` added to
// the diagonal of the result.
SparseCx submatrix_shifted(const SparseCx& m, const std::vector<int>& keep,
                           double shift) {
  const int n = static_cast<int>(m.rows());
  std::vector<int> remap(n, -1);
  for (std::size_t i = 0; i < keep.size(); ++i) remap[keep[i]] = static_cast<int>(i);
  std::vector<Eigen::Triplet<Cplx>> trips;
  for (int idx = 0; idx < static_cast<int>(keep.size()); ++idx) {
    const int r = keep[idx];
    for (SparseCx::InnerIterator it(m, r); it; ++it) {
      const int cj = remap[it.col()];
      if (cj < 0) continue;
      Cplx v = it.value();
      if (cj == idx) v += shift;
      trips.emplace_back(idx, cj, v);
    }
  }
  SparseCx out(keep.size(), keep.size());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

double hermitian_max_dense(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (m + m.adjoint()),
                                                     Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

// Largest eigenvalue of a sparse Hermitian matrix, dense below the threshold
// and Lanczos above it.
double sparse_hermitian_max(const SparseCx& m, const SpectrumOptions& opts,
                            std::string* method) {
  const int n = static_cast<int>(m.rows());
  if (n == 0) {
    if (method) *method = "empty";
    return -std::numeric_limits<double>::infinity();
  }
  if (n <= opts.dense_threshold) {
    if (method) *method = "dense";
    return hermitian_max_dense(Eigen::MatrixXcd(m));
  }
  if (method) *method = "lanczos";
  const LinOp apply = [&m](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
    sparse_apply(m, x, y);
  };
  const EigReport rep = hermitian_max_eigenvalue(apply, n, opts.lanczos);
  if (!rep.converged) {
    throw NumericalError("eigenvalue iteration stalled at residual " +
                         std::to_string(rep.residual) + " after " +
                         std::to_string(rep.iterations) + " steps");
  }
  return rep.value;
}

std::vector<int> unobserved_indices(const Eigen::VectorXd& h) {
  std::vector<int> idx;
  for (int i = 0; i < h.size(); ++i) {
    if (h[i] == 0.0) idx.push_back(i);
  }
  return idx;
}

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

const char* gain_method_name(GainMethod m) {
  switch (m) {
    case GainMethod::kStructured:
      return "structured";
    case GainMethod::kIterative:
      return "iterative";
    case GainMethod::kDensePseudoinverse:
      return "dense-pseudoinverse";
  }
  return "unknown";
}

GainProblem assemble_gain_problem(const SpectralVorticity& omega_hat,
                                  const Eigen::VectorXd& d_diag, const PdSpec& q_model,
                                  double q, const ModeGrid& grid,
                                  const ObservationModel& obs) {
  const int n = grid.size();
  if (!(q > 0.0)) throw ValidationError("gain level q must be positive");
  if (d_diag.size() != n) throw ValidationError("forcing mask has wrong dimension");
  if (q_model.dim() != n) {
    throw ValidationError("model uncertainty bound has wrong dimension");
  }
  if (obs.state_dim() != n) {
    throw ValidationError("observation model does not match the grid");
  }

  const SparseCx b1 = assemble_linearized_convection(omega_hat, grid);
  SparseCx diag(n, n);
  diag.reserve(Eigen::VectorXi::Constant(n, 1));
  for (int i = 0; i < n; ++i) {
    diag.insert(i, i) = Cplx(d_diag[i] * d_diag[i] * q_model.diag[i] + q, 0.0);
  }
  diag.makeCompressed();

  GainProblem prob;
  prob.w = SparseCx(b1 + SparseCx(b1.adjoint())) + diag;
  prob.obs = &obs;
  prob.q = q;
  return prob;
}

Gain solve_gain_structured(const GainProblem& problem) {
  if (!problem.obs) throw ValidationError("gain problem carries no observation model");
  if (!problem.obs->is_selection()) {
    Gain g = solve_gain_iterative(problem);
    g.fell_back = true;
    return g;
  }
  const Eigen::VectorXd h = problem.obs->hh_diagonal();
  const int n = static_cast<int>(problem.w.rows());

  Gain gain;
  gain.method = GainMethod::kStructured;
  SparseCx p(n, n);
  const auto* outer = problem.w.outerIndexPtr();
  const auto* inner = problem.w.innerIndexPtr();
  const auto* vals = problem.w.valuePtr();

  auto* pouter = p.outerIndexPtr();
  pouter[0] = 0;
  for (int r = 0; r < n; ++r) {
    int cnt = 0;
    for (auto i = outer[r]; i < outer[r + 1]; ++i) {
      if (h[r] + h[inner[i]] > 0.0) ++cnt;
    }
    pouter[r + 1] = pouter[r] + cnt;
  }
  p.resizeNonZeros(pouter[n]);
  auto* pinner = p.innerIndexPtr();
  auto* pvals = p.valuePtr();
  double drop2 = 0.0;
  for (int r = 0; r < n; ++r) {
    int pos = pouter[r];
    for (auto i = outer[r]; i < outer[r + 1]; ++i) {
      const double denom = h[r] + h[inner[i]];
      if (denom > 0.0) {
        pinner[pos] = inner[i];
        pvals[pos] = vals[i] / denom;
        ++pos;
      } else {
        drop2 += std::norm(vals[i]);
      }
    }
  }
  gain.p = std::move(p);
  gain.residual = std::sqrt(drop2);
  return gain;
}

Gain solve_gain_iterative(const GainProblem& problem, double rel_tol, int max_iters) {
  if (!problem.obs) throw ValidationError("gain problem carries no observation model");
  const int n = static_cast<int>(problem.w.rows());
  const Eigen::MatrixXcd w = Eigen::MatrixXcd(problem.w);
  const Eigen::MatrixXcd g = problem.obs->hh_dense();

  const auto v_of = [&g](const Eigen::MatrixXcd& p) -> Eigen::MatrixXcd {
    return p * g + g * p;
  };

  // CGLS on the self-adjoint map V: iterates minimize |V(x) - W|_F and the
  // stopping rule watches the normal-equation residual V(W - V(x)).
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd r = w;
  Eigen::MatrixXcd s = v_of(r);
  Eigen::MatrixXcd p = s;
  double gamma = s.squaredNorm();
  const double gamma0 = gamma;
  int iters = 0;
  while (iters < max_iters && gamma > rel_tol * rel_tol * gamma0) {
    const Eigen::MatrixXcd vp = v_of(p);
    const double denom = vp.squaredNorm();
    if (denom == 0.0) break;
    const double alpha = gamma / denom;
    x += alpha * p;
    r -= alpha * vp;
    s = v_of(r);
    const double gamma_new = s.squaredNorm();
    p = s + (gamma_new / gamma) * p;
    gamma = gamma_new;
    ++iters;
  }
  if (gamma > rel_tol * rel_tol * gamma0 && gamma0 > 0.0) {
    throw NumericalError("iterative gain solve did not converge: " +
                         std::to_string(iters) + " iterations, normal residual " +
                         std::to_string(std::sqrt(gamma / gamma0)));
  }

  x = 0.5 * (x + x.adjoint()).eval();
  Gain gain;
  gain.method = GainMethod::kIterative;
  gain.iterations = iters;
  gain.residual = (v_of(x) - w).norm();
  gain.p = x.sparseView(1.0, 0.0);
  return gain;
}

DetectabilityReport check_detectability(const GainProblem& problem, const Gain& gain,
                                        const SpectrumOptions& opts) {
  if (!problem.obs) throw ValidationError("gain problem carries no observation model");
  const int n = static_cast<int>(problem.w.rows());
  DetectabilityReport rep;
  rep.margin = kMarginFactor * problem.q;

  if (problem.obs->is_selection()) {
    const Eigen::VectorXd h = problem.obs->hh_diagonal();
    const SparseCx residual = problem.w - scale_by_h_sums(gain.p, h);

    const std::vector<int> unobs = unobserved_indices(h);
    rep.has_unobservable = !unobs.empty();
    if (rep.has_unobservable) {
      const SparseCx block = submatrix_shifted(problem.w, unobs, 0.0);
      rep.unobservable_max = sparse_hermitian_max(block, opts, nullptr);
    } else {
      rep.unobservable_max = nan_value();
    }
    rep.max_real_part = sparse_hermitian_max(residual, opts, &rep.method);
  } else {
    if (n > opts.dense_threshold) {
      throw NumericalError("detectability check for dense-row models needs a dense "
                           "eigensolve; dimension " + std::to_string(n) +
                           " exceeds the threshold");
    }
    const Eigen::MatrixXcd g = problem.obs->hh_dense();
    const Eigen::MatrixXcd p = Eigen::MatrixXcd(gain.p);
    const Eigen::MatrixXcd residual = Eigen::MatrixXcd(problem.w) - p * g - g * p;
    rep.has_unobservable = false;
    rep.unobservable_max = nan_value();
    const double herm_defect = (residual - residual.adjoint()).norm();
    if (herm_defect > 1e-12 * std::max(residual.norm(), 1.0)) {
      // A user-supplied non-Hermitian gain; fall back to the general solver.
      rep.method = "general-dense";
      Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(residual, false);
      rep.max_real_part = es.eigenvalues().real().maxCoeff();
    } else {
      rep.method = "dense";
      rep.max_real_part = hermitian_max_dense(residual);
    }
  }
  rep.verdict = rep.max_real_part < -rep.margin;
  return rep;
}

namespace {

LmiReport lmi_core(const Eigen::MatrixXcd& p, const SpectralVorticity& omega_hat,
                   const Eigen::VectorXd& d_diag, const PdSpec& q_model, double q,
                   const ObservationModel& obs, const ModeGrid& grid,
                   bool with_noise_term) {
  const int n = grid.size();
  if (n > 2000) {
    throw ValidationError("dense inequality check not supported above dimension 2000");
  }
  if (p.rows() != n || p.cols() != n) {
    throw ValidationError("candidate gain has wrong dimensions");
  }
  if ((p - p.adjoint()).norm() > 1e-10 * std::max(p.norm(), 1.0)) {
    throw ValidationError("candidate gain must be Hermitian");
  }
  if (!(q > 0.0)) throw ValidationError("level q must be positive");

  Eigen::MatrixXcd m = Eigen::MatrixXcd(assemble_linearized_convection(omega_hat, grid));
  m += m.adjoint().eval();
  for (int i = 0; i < n; ++i) {
    m(i, i) += Cplx(d_diag[i] * d_diag[i] * q_model.diag[i] + q, 0.0);
  }
  const Eigen::MatrixXcd g = obs.hh_dense();
  m -= p * g + g * p;

  if (with_noise_term && obs.noise_matrix.size()) {
    const Eigen::MatrixXcd hp = obs.is_selection()
                                    ? [&] {
                                        Eigen::MatrixXcd out(obs.observed_count(), n);
                                        for (int i = 0; i < obs.observed_count(); ++i) {
                                          out.row(i) = p.row(obs.selected[i]);
                                        }
                                        return out;
                                      }()
                                    : Eigen::MatrixXcd(obs.rows * p);
    const Eigen::MatrixXcd u = obs.noise_matrix.cast<Cplx>().adjoint() * hp;
    m += u.adjoint() * obs.noise_bound.diag.cast<Cplx>().asDiagonal() * u;
  }

  LmiReport rep;
  rep.margin = kMarginFactor * q;
  rep.max_eigenvalue = hermitian_max_dense(m);
  rep.holds = rep.max_eigenvalue < -rep.margin;
  return rep;
}

}  // namespace

LmiReport check_lmi(const Eigen::MatrixXcd& p, const SpectralVorticity& omega_hat,
                    const Eigen::VectorXd& d_diag, const PdSpec& q_model, double q,
                    const ObservationModel& obs, const ModeGrid& grid) {
  return lmi_core(p, omega_hat, d_diag, q_model, q, obs, grid, false);
}

LmiReport riccati_residual(const Eigen::MatrixXcd& p, const SpectralVorticity& omega_hat,
                           const Eigen::VectorXd& d_diag, const PdSpec& q_model,
                           double q, const ObservationModel& obs, const ModeGrid& grid) {
  return lmi_core(p, omega_hat, d_diag, q_model, q, obs, grid, true);
}

ErrorBoundParams error_bound_params(double q, double nu, const ModeGrid& grid,
                                    const PdSpec& s_init) {
  if (!(q > 0.0)) throw ValidationError("level q must be positive");
  if (!(nu > 0.0)) throw ValidationError("viscosity must be positive");
  if (s_init.dim() != grid.size()) {
    throw ValidationError("initial-error bound has wrong dimension");
  }
  const Eigen::VectorXd lambda = laplacian_spectrum(grid);
  double min_nonzero = std::numeric_limits<double>::infinity();
  for (int k = 0; k < lambda.size(); ++k) {
    if (k == grid.center()) continue;
    min_nonzero = std::min(min_nonzero, lambda[k]);
  }
  ErrorBoundParams params;
  params.q = q;
  params.lambda_a = nu * min_nonzero;
  params.lambda_s = s_init.max_eigenvalue();
  params.c1 = 1.0 / (2.0 * params.lambda_a + q);
  params.c2 = params.lambda_s - params.c1;
  return params;
}

double error_bound(const ErrorBoundParams& params, double t) {
  if (t < 0.0) throw ValidationError("bound evaluated at negative time");
  return params.c1 + params.c2 * std::exp(-(2.0 * params.lambda_a + params.q) * t);
}

FilterStepResult filter_step(const SpectralVorticity& omega_hat, const SparseCx& gain_p,
                             const Eigen::VectorXcd& y_t, const Eigen::VectorXcd& y_t1,
                             const Eigen::VectorXd& a_diag, const ObservationModel& obs,
                             double dt, const ModeGrid& grid, const GmresOptions& opts,
                             const std::string& context) {
  const SparseCx b = assemble_convection(omega_hat, grid);
  const Eigen::VectorXcd a_cplx = a_diag.cast<Cplx>();

  const LinOp j = [&](const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
    sparse_apply(b, in, out);
    out += a_cplx.cwiseProduct(in);
    Eigen::VectorXcd masked = obs.adjoint_apply(obs.apply(in));
    Eigen::VectorXcd correction(in.size());
    sparse_apply(gain_p, masked, correction);
    out -= correction;
  };

  const Eigen::VectorXcd innovation = obs.adjoint_apply(0.5 * (y_t + y_t1));
  Eigen::VectorXcd f_half(grid.size());
  sparse_apply(gain_p, innovation, f_half);

  FilterStepResult result;
  result.next = midpoint_step(omega_hat, j, f_half, dt, opts, &result.step, context);
  result.correction = enforce_conjugate_symmetry(result.next, grid);
  return result;
}

FilterRun run_filter(const ObservationSeries& series, const ObservationModel& model,
                     const ModeGrid& grid, const FilterSettings& st) {
  const int n = grid.size();
  const int points = static_cast<int>(series.times.size());
  if (points < 2) throw ValidationError("observation series needs at least two points");
  if (series.values.cols() != points) {
    throw ValidationError("observation series times/values mismatch");
  }
  if (series.values.rows() != model.observed_count()) {
    throw ValidationError("observation series does not match the model");
  }
  if (model.state_dim() != n) {
    throw ValidationError("observation model does not match the grid");
  }
  if (st.gain_refresh_stride < 1 || st.diagnostics_stride < 1) {
    throw ValidationError("strides must be >= 1");
  }
  if (st.truth && static_cast<int>(st.truth->states.size()) != points) {
    throw ValidationError("truth trajectory does not match the observation series");
  }
  const double dt = series.times[1] - series.times[0];
  for (int t = 1; t < points; ++t) {
    if (std::abs(series.times[t] - series.times[t - 1] - dt) > 1e-9 * std::max(1.0, dt)) {
      throw ValidationError("observation series must be uniformly spaced");
    }
  }

  const Eigen::VectorXd a_diag = diffusion_diagonal(grid, st.nu);
  const double q_solve = st.q * (1.0 + st.q_solve_slack);
  const double shift_back = st.q - q_solve;  // restores level q on the diagonal
  const double margin = kMarginFactor * st.q;

  FilterRun run;
  run.times = series.times;
  run.estimates.reserve(points);
  const auto nan_vec = [&] { return Eigen::VectorXd::Constant(points, nan_value()); };
  run.sigma = nan_vec();
  run.rel_full = nan_vec();
  run.rel_obs = nan_vec();
  run.det_max = nan_vec();
  run.det_unobs = nan_vec();
  run.lmi_max = nan_vec();
  run.gain_residual = nan_vec();
  run.resym_correction = Eigen::VectorXd::Zero(points);
  run.det_pass.assign(points, -1);
  run.lmi_holds.assign(points, -1);

  const bool selection = model.is_selection();
  const Eigen::VectorXd h = selection ? model.hh_diagonal() : Eigen::VectorXd();
  const std::vector<int> unobs =
      selection ? unobserved_indices(h) : std::vector<int>();

  SpectralVorticity x = SpectralVorticity::Zero(n);
  Gain gain;
  bool gain_ready = false;

  for (int t = 0; t < points; ++t) {
    run.estimates.push_back(x);
    if (st.truth) {
      const SpectralVorticity& w = st.truth->states[t];
      const SpectralVorticity diff = x - w;
      run.sigma[t] = diff.squaredNorm();
      run.rel_full[t] = diff.norm() / std::max(w.norm(), 1e-300);
      run.rel_obs[t] =
          model.apply(diff).norm() / std::max(model.apply(w).norm(), 1e-300);
    }

    bool have_prob = false;
    GainProblem prob;
    bool gain_fresh = false;
    try {
      if (t % st.gain_refresh_stride == 0 || !gain_ready) {
        prob = assemble_gain_problem(x, st.d_diag, st.q_model, q_solve, grid, model);
        have_prob = true;
        gain = selection ? solve_gain_structured(prob) : solve_gain_iterative(prob);
        gain_ready = true;
        gain_fresh = true;
        run.gain_residual[t] = gain.residual;
        run.gain_method = gain_method_name(gain.method);
      }

      if (t % st.diagnostics_stride == 0) {
        if (!have_prob) {
          prob = assemble_gain_problem(x, st.d_diag, st.q_model, q_solve, grid, model);
          have_prob = true;
        }
        if (selection) {
          // Detectability is a property of W alone: against the least-squares
          // gain of W itself the residual is W on the unobserved block and
          // exactly zero elsewhere.
          double unobs_max = -std::numeric_limits<double>::infinity();
          if (!unobs.empty()) {
            const SparseCx block = submatrix_shifted(prob.w, unobs, shift_back);
            unobs_max = sparse_hermitian_max(block, st.spectrum, nullptr);
            run.det_unobs[t] = unobs_max;
            run.det_max[t] = std::max(unobs_max, 0.0);
          } else {
            run.det_max[t] = 0.0;
          }
          run.det_pass[t] = run.det_max[t] < -margin ? 1 : 0;

          // The inequality the filter actually runs with uses the slack gain.
          if (gain_fresh && gain.method == GainMethod::kStructured) {
            run.lmi_max[t] = unobs.empty() ? shift_back
                                           : std::max(unobs_max, shift_back);
          } else {
            SparseCx residual = prob.w - scale_by_h_sums(gain.p, h);
            for (int i = 0; i < n; ++i) residual.coeffRef(i, i) += shift_back;
            run.lmi_max[t] = sparse_hermitian_max(residual, st.spectrum, nullptr);
          }
          run.lmi_holds[t] = run.lmi_max[t] < -margin ? 1 : 0;
        } else {
          GainProblem level_prob = prob;
          for (int i = 0; i < n; ++i) level_prob.w.coeffRef(i, i) += shift_back;
          const DetectabilityReport det =
              check_detectability(level_prob, gain, st.spectrum);
          run.det_max[t] = det.max_real_part;
          run.det_unobs[t] = det.unobservable_max;
          run.det_pass[t] = det.verdict ? 1 : 0;
          run.lmi_max[t] = det.max_real_part;
          run.lmi_holds[t] = det.verdict ? 1 : 0;
        }
      }

      if (t + 1 < points) {
        const FilterStepResult step =
            filter_step(x, gain.p, series.values.col(t), series.values.col(t + 1),
                        a_diag, model, dt, grid, st.gmres,
                        "filter step " + std::to_string(t));
        x = step.next;
        run.resym_correction[t + 1] = step.correction;
        run.max_correction = std::max(run.max_correction, step.correction);
      }
    } catch (const NumericalError& err) {
      run.failed = true;
      run.failure = "step " + std::to_string(t) + ": " + err.what();
      break;
    }
  }
  return run;
}

}  // namespace fgda
