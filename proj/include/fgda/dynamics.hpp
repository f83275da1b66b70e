#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fgda/mode_grid.hpp"
#include "fgda/operators.hpp"
#include "fgda/solvers.hpp"
#include "fgda/state.hpp"

namespace fgda {

// External forcing injected through a diagonal mask:  the model term is
// D f(t).  f defaults to the constant amplitude vector when no sampler is
// set.  Df must itself be a valid state (conjugate-symmetric, zero mean) or
// the simulated field stops being real.
struct ForcingSpec {
  Eigen::VectorXd d_diagonal;                          // diagonal of D
  Eigen::VectorXcd amplitude;                          // constant f
  std::function<Eigen::VectorXcd(double)> sampler;     // optional f(t)
  std::string note;                                    // recorded in manifests

  Eigen::VectorXcd f_at(double t) const {
    return sampler ? sampler(t) : amplitude;
  }
  Eigen::VectorXcd df_at(double t) const {
    return d_diagonal.cast<Cplx>().cwiseProduct(f_at(t));
  }

  // Euclidean norm of the constant amplitude vector, used by the model
  // uncertainty scaling rule.
  double amplitude_norm() const { return amplitude.norm(); }

  // Largest component magnitude of the constant amplitude vector, the
  // max-norm alternative for the same scaling rule.
  double amplitude_max() const { return amplitude.cwiseAbs().maxCoeff(); }
};

// Zero forcing of the right shape.
ForcingSpec no_forcing(const ModeGrid& grid);

// Smooth three-bump vorticity profile used as the default initial condition:
// two positive lobes and one negative, Gaussian-localized around the domain
// center so the periodic continuation is smooth to machine precision.  (x,y)
// are absolute coordinates in (0,lx) x (0,ly).
double default_initial_field(double x, double y, double lx, double ly);

// Forcing concentrated on the conjugate mode pair (0,-offset), (0,+offset):
// the mask D selects the pair and every component of the constant amplitude
// vector equals offset/2.  The selected linear positions come from a
// one-based position formula; the two resolved zero-based positions are
// mirror images of each other, which is asserted here because it is what
// keeps the forced field real.  offset must satisfy 1 <= offset <= N2/2.
ForcingSpec paired_mode_forcing(const ModeGrid& grid, int offset);

struct Trajectory {
  Eigen::VectorXd times;
  std::vector<SpectralVorticity> states;
  // Largest re-symmetrization correction applied after any step; stays at
  // roundoff level unless a solver misbehaved.
  double max_symmetry_correction = 0.0;
};

// Galerkin right-hand side B(w) w + A w + D f evaluated directly.  Used by
// step-size studies and tests; the integrator itself works with the frozen
// linearization below.
SpectralVorticity rhs_state(const SpectralVorticity& w, const Eigen::VectorXd& a_diag,
                            const Eigen::VectorXcd& df, const ModeGrid& grid);

struct StepReport {
  int gmres_iterations = 0;
  double rel_residual = 0.0;
};

// One implicit midpoint step for the linear system  x' = J x + f(t)  with J
// frozen over the step:
//   (I - dt/2 J) x_next = (I + dt/2 J) x_curr + dt * f_half,
// where f_half is the two-point average of the forcing.  The solve runs
// matrix-free GMRES with warm start x_curr and verifies the true residual
// against opts.rel_tol * |rhs|; failure throws NumericalError tagged with
// `context`.  For skew-Hermitian J the step preserves the norm exactly, and
// adding a negative diagonal makes it dissipative, so the discrete flow
// inherits the enstrophy laws of the model.
SpectralVorticity midpoint_step(const SpectralVorticity& x, const LinOp& j_op,
                                const Eigen::VectorXcd& f_half, double dt,
                                const GmresOptions& opts, StepReport* report = nullptr,
                                const std::string& context = "midpoint_step");

// Integrates the vorticity model from omega0 with the convection operator
// re-frozen at the current state each step.  t_final must be an integer
// multiple of dt (tolerance 1e-9 relative).  Every stored state is valid;
// conjugate symmetry is re-enforced after each step and the largest applied
// correction is recorded.
Trajectory simulate_truth(const SpectralVorticity& omega0, const ForcingSpec& forcing,
                          double nu, const ModeGrid& grid, double dt, double t_final,
                          const GmresOptions& opts = {});

}  // namespace fgda
