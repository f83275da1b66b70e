#pragma once

#include <cstdint>
#include <functional>

#include "fgda/types.hpp"

namespace fgda {

// Matrix-free operator: y = A x.  y is preallocated by the caller or resized
// by the callee; implementations must not alias x and y.
using LinOp = std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>;

struct GmresOptions {
  double rel_tol = 1e-10;
  int restart = 80;
  int max_iters = 2000;
};

struct GmresReport {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

// Restarted GMRES with modified Gram-Schmidt and Givens rotations.  x holds
// the initial guess on entry and the solution on exit.  The reported residual
// comes from the rotation recurrence; callers that need a guarantee should
// re-check the true residual (midpoint stepping does).
GmresReport gmres_solve(const LinOp& op, const Eigen::VectorXcd& rhs,
                        Eigen::VectorXcd& x, const GmresOptions& opts = {});

struct LanczosOptions {
  int max_dim = 120;
  double rel_tol = 1e-8;
  std::uint64_t seed = 20260822ull;
};

struct EigReport {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
};

// Largest eigenvalue of a Hermitian operator by Lanczos iteration with full
// reorthogonalization.  Deterministic: the start vector comes from the seeded
// portable stream and all reductions are serial.  Used for spectra of the
// large sparse residual operators where a dense solve is out of reach.
EigReport hermitian_max_eigenvalue(const LinOp& op, int n,
                                   const LanczosOptions& opts = {});

}  // namespace fgda
