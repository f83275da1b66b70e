#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fgda/dynamics.hpp"
#include "fgda/mode_grid.hpp"
#include "fgda/state.hpp"
#include "fgda/types.hpp"

namespace fgda {

// Positive definite matrix kept in diagonal form, which covers every bound
// used by the shipped experiments (all are scalar multiples of the identity).
struct PdSpec {
  Eigen::VectorXd diag;

  static PdSpec scaled_identity(double s, int n);
  static PdSpec diagonal(Eigen::VectorXd d);

  int dim() const { return static_cast<int>(diag.size()); }
  double max_eigenvalue() const { return diag.maxCoeff(); }
  // Re x^* M^{-1} x, the ellipsoid quadratic form.
  double quad_inv(const Eigen::VectorXcd& x) const;
  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const {
    return diag.cast<Cplx>().cwiseProduct(x);
  }
};

// Linear observation y = H w + F eta.  Two shapes of H are supported:
//   * selection: rows of the identity picking observed coefficients; this is
//     the shape the structured gain solver exploits (H^*H is a 0/1 diagonal);
//   * dense rows: arbitrary row functionals, e.g. built from sampling kernels.
// F scales the noise channel (empty means noise-free); R is the PD bound on
// the noise used by the containment checks and the algebraic residual test.
struct ObservationModel {
  int n_state = 0;
  std::vector<int> selected;                  // selection mode, sorted linear indices
  std::vector<std::pair<int, int>> selected_modes;  // same rows as (c,d) pairs
  Eigen::MatrixXcd rows;                      // dense mode, M x N
  Eigen::MatrixXd noise_matrix;               // F, M x M, empty = zero
  PdSpec noise_bound;                         // R

  bool is_selection() const { return rows.size() == 0; }
  int observed_count() const {
    return is_selection() ? static_cast<int>(selected.size())
                          : static_cast<int>(rows.rows());
  }
  int state_dim() const { return n_state; }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& w) const;          // H w
  Eigen::VectorXcd adjoint_apply(const Eigen::VectorXcd& y) const;  // H^* y
  // Diagonal of H^*H; exact for selection models, throws for dense rows.
  Eigen::VectorXd hh_diagonal() const;
  Eigen::MatrixXcd hh_dense() const;                                // H^*H
};

// Builds a selection model over the given modes.  The set must be duplicate
// free, in band, and closed under negation (observing a coefficient without
// its conjugate partner would break realness of the innovation).  Rows are
// ordered by linear index.  R defaults to the identity, F to empty.
ObservationModel selection_observation(const ModeGrid& grid,
                                       const std::vector<std::pair<int, int>>& modes);

// Cartesian product helper: all modes (c,d) with c and d drawn from the same
// offset list; the list is symmetrized automatically.
std::vector<std::pair<int, int>> mode_product(const std::vector<int>& offsets);

// Builds a dense-row model from point-sampling kernels: row i is the
// band-limited projection of a Dirac comb at (x_i, y_i), so y_i approximates
// the field value at that point.
ObservationModel kernel_observation(const ModeGrid& grid,
                                    const std::vector<std::pair<double, double>>& points);

struct ObservationSeries {
  Eigen::VectorXd times;
  Eigen::MatrixXcd values;   // M x (steps+1), column per time point
  std::uint64_t seed = 0;
  double noise_amplitude = 0.0;
  std::string noise_law;     // rng id + interval convention
};

// Samples y_t = H w_t + F eta_t along a trajectory.  eta is uniform
// complex noise drawn component-wise from the seeded portable stream and
// conjugate-symmetrized across paired observation rows so that noisy data
// still corresponds to a real field.  With literal_interval false (the
// default) both real and imaginary parts are uniform on
// (-amplitude/sqrt(N), +amplitude/sqrt(N)); the literal variant keeps the
// asymmetric upper bound amplitude*sqrt(N).
ObservationSeries generate_observations(const Trajectory& traj,
                                        const ObservationModel& model,
                                        const ModeGrid& grid, double amplitude,
                                        std::uint64_t seed,
                                        bool literal_interval = false);

// The uncertainty set of the convergence statement: initial error in S,
// model error in Q, observation noise in R, each as a centered ellipsoid.
struct UncertaintyEllipsoid {
  PdSpec s;
  PdSpec q;
  PdSpec r;
};

struct ContainmentReport {
  bool contained = false;
  double margin = 0.0;  // 1 - worst quadratic form value; >= 0 when contained
};

// Checks omega0 against S and every supplied disturbance sample against Q
// (model error) and R (noise).  margin = 1 - max of the quadratic forms.
ContainmentReport ellipsoid_contains(const UncertaintyEllipsoid& e,
                                     const Eigen::VectorXcd& omega0,
                                     const std::vector<Eigen::VectorXcd>& model_errors,
                                     const std::vector<Eigen::VectorXcd>& noises);

}  // namespace fgda
