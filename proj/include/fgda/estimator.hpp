#pragma once

#include <string>
#include <vector>

#include "fgda/dynamics.hpp"
#include "fgda/observation.hpp"
#include "fgda/solvers.hpp"
#include "fgda/state.hpp"
#include "fgda/types.hpp"

namespace fgda {

// Data of the per-step gain equation
//   P H^*H + H^*H P = W,   W = B1 + B1^* + D Q D^* + q I
// with B1 the convection linearization at the current estimate.  The model
// pointer is borrowed; callers keep it alive for the problem's lifetime.
struct GainProblem {
  SparseCx w;
  const ObservationModel* obs = nullptr;
  double q = 0.0;
};

GainProblem assemble_gain_problem(const SpectralVorticity& omega_hat,
                                  const Eigen::VectorXd& d_diag, const PdSpec& q_model,
                                  double q, const ModeGrid& grid,
                                  const ObservationModel& obs);

enum class GainMethod { kStructured, kIterative, kDensePseudoinverse };

const char* gain_method_name(GainMethod m);

struct Gain {
  SparseCx p;           // Hermitian gain matrix
  GainMethod method = GainMethod::kStructured;
  double residual = 0.0;  // |P H^*H + H^*H P - W|_F achieved by the solve
  bool fell_back = false;  // structured request rerouted to the iterative path
  int iterations = 0;
};

// Closed-form least-squares solution for selection observations: with
// h = diag(H^*H) a 0/1 vector, the normal equations decouple entrywise to
//   P_ij = W_ij / (h_i + h_j)      whenever h_i + h_j > 0,
//   P_ij = 0                       otherwise,
// which is exact in floating point because the divisors are 1 and 2.  The
// residual is then exactly the unobserved-by-unobserved block of W.  For
// dense-row models this routine falls back to the iterative solver and says
// so in the returned Gain.
Gain solve_gain_structured(const GainProblem& problem);

// Conjugate-gradient least squares on the normal equations of the map
// P -> P H^*H + H^*H P over Hermitian matrices (Frobenius inner product).
// Works for any H^*H; converges to the minimum-norm least-squares solution
// from the zero start.  Dense working storage, intended for moderate N or as
// a cross-check of the structured path.
Gain solve_gain_iterative(const GainProblem& problem, double rel_tol = 1e-12,
                          int max_iters = 1000);

struct SpectrumOptions {
  int dense_threshold = 700;  // dimensions up to this use a dense eigensolver
  LanczosOptions lanczos;
};

struct DetectabilityReport {
  double max_real_part = 0.0;       // over the spectrum of W - (P H^*H + H^*H P)
  double unobservable_max = 0.0;    // largest eigenvalue of the unobserved block
  bool has_unobservable = false;    // false when H observes every coefficient
  bool verdict = false;             // pass iff max_real_part < -margin
  double margin = 0.0;
  std::string method;               // "dense" or "lanczos"
};

// Spectral test of the least-squares residual W - (P H^*H + H^*H P) for the
// supplied gain.  The verdict margin is 1e-8 * q.  For selection models the
// report also carries the largest eigenvalue of W restricted to unobserved
// indices, which is the informative part of the residual: the observed
// directions contribute structural near-zero eigenvalues, so with any
// strictly unobserved coefficient and q > 0 the test cannot pass.  That is
// the expected outcome for partial observation; the filter is still run and
// its error tracked against the bound.
DetectabilityReport check_detectability(const GainProblem& problem, const Gain& gain,
                                        const SpectrumOptions& opts = {});

struct LmiReport {
  double max_eigenvalue = 0.0;
  bool holds = false;
  double margin = 0.0;
};

// Largest eigenvalue of  B1 + B1^* + D Q D^* - P H^*H - H^*H P + q I  for a
// dense candidate gain; holds iff it is below -1e-8*q.  Dense eigensolve,
// meant for analysis-scale grids.
LmiReport check_lmi(const Eigen::MatrixXcd& p, const SpectralVorticity& omega_hat,
                    const Eigen::VectorXd& d_diag, const PdSpec& q_model, double q,
                    const ObservationModel& obs, const ModeGrid& grid);

// Same matrix plus the noise feed-through term  P H^* F R F^* H P; this is
// the full algebraic inequality behind the convergence statement.  With
// F = 0 it reduces to check_lmi.
LmiReport riccati_residual(const Eigen::MatrixXcd& p, const SpectralVorticity& omega_hat,
                           const Eigen::VectorXd& d_diag, const PdSpec& q_model,
                           double q, const ObservationModel& obs, const ModeGrid& grid);

struct ErrorBoundParams {
  double q = 0.0;
  double lambda_a = 0.0;  // slowest decay rate of the diffusion operator
  double lambda_s = 0.0;  // largest eigenvalue of the initial-error bound S
  double c1 = 0.0;        // 1 / (2 lambda_a + q)
  double c2 = 0.0;        // lambda_s - c1
};

// lambda_a is nu times the smallest nonzero Laplacian eigenvalue: the mean
// mode is pinned to zero on both sides of the error equation, so the decay
// rate is read off the mean-free subspace.
ErrorBoundParams error_bound_params(double q, double nu, const ModeGrid& grid,
                                    const PdSpec& s_init);

// Envelope  c1 + c2 * exp(-(2 lambda_a + q) t).
double error_bound(const ErrorBoundParams& params, double t);

struct FilterStepResult {
  SpectralVorticity next;
  double correction = 0.0;  // re-symmetrization norm
  StepReport step;
};

// One assimilation step: midpoint integration of
//   x' = (B(omega_hat) + A - P H^*H) x + P H^* (y_t + y_{t+1})/2
// with everything frozen at the step start.  The estimate is re-symmetrized
// afterwards and the correction norm reported.
FilterStepResult filter_step(const SpectralVorticity& omega_hat, const SparseCx& gain_p,
                             const Eigen::VectorXcd& y_t, const Eigen::VectorXcd& y_t1,
                             const Eigen::VectorXd& a_diag, const ObservationModel& obs,
                             double dt, const ModeGrid& grid, const GmresOptions& opts,
                             const std::string& context);

struct FilterSettings {
  double nu = 0.0;
  double q = 0.0;
  // The gain is solved from W assembled at q*(1+q_solve_slack).  The slack
  // turns the boundary case of full observation into a strict inequality at
  // level q; everywhere else it is a negligible diagonal shift.
  double q_solve_slack = 1e-6;
  PdSpec q_model;
  Eigen::VectorXd d_diag;
  int gain_refresh_stride = 1;
  int diagnostics_stride = 1;
  GmresOptions gmres;
  SpectrumOptions spectrum;
  const Trajectory* truth = nullptr;  // twin mode when set
};

struct FilterRun {
  Eigen::VectorXd times;
  std::vector<SpectralVorticity> estimates;
  // Twin-mode error tracking (NaN without truth): sigma is the squared
  // coefficient-space error, the rel columns are relative errors over all and
  // over observed coefficients.
  Eigen::VectorXd sigma, rel_full, rel_obs;
  // Spectral diagnostics (NaN on steps skipped by the stride).
  Eigen::VectorXd det_max, det_unobs, lmi_max;
  std::vector<int> det_pass, lmi_holds;  // 1 / 0 / -1 = not evaluated
  Eigen::VectorXd gain_residual, resym_correction;
  std::string gain_method;
  double max_correction = 0.0;
  bool failed = false;
  std::string failure;

  int step_count() const { return static_cast<int>(times.size()); }
};

// Runs the filter from the zero estimate across an observation series.
// Per step: refresh the gain on its stride, evaluate spectral diagnostics on
// theirs, then advance with filter_step.  Numerical failure aborts the loop
// and returns the partial run with `failed` set and the failing step named.
FilterRun run_filter(const ObservationSeries& series, const ObservationModel& model,
                     const ModeGrid& grid, const FilterSettings& settings);

}  // namespace fgda
