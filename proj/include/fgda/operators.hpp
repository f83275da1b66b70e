#pragma once

#include "fgda/mode_grid.hpp"
#include "fgda/state.hpp"
#include "fgda/types.hpp"

namespace fgda {

// Dirichlet eigenvalues of -Laplacian restricted to the mode basis:
//   lambda(c,d) = 4 pi^2 c^2 / Lx^2 + 4 pi^2 d^2 / Ly^2,
// indexed linearly.  lambda = 0 exactly at the mean mode.
Eigen::VectorXd laplacian_spectrum(const ModeGrid& grid);

// Diagonal of the diffusion operator A = -nu * diag(lambda).  nu must be > 0.
Eigen::VectorXd diffusion_diagonal(const ModeGrid& grid, double nu);

// Diagonal of the mean-flow advection operator for a constant background
// velocity (u,v):  entry(c,d) = -(2 pi i c u / Lx - 2 pi i d v / Ly).
// The sign asymmetry between the two terms is part of the model definition;
// with zero mean flow the operator vanishes, which is the configuration every
// shipped experiment uses.
Eigen::VectorXcd mean_flow_diagonal(const ModeGrid& grid, double u_mean, double v_mean);

// Real symmetric matrix Psi mapping each conjugate mode pair onto its real
// and imaginary combinations:
//   Psi = 1/sqrt(2) [ I_n  0   J_n ]
//                   [ 0    0   0   ]
//                   [ J_n  0  -I_n ]
// with n = (N-1)/2 and J_n the flip permutation.  Psi^2 = diag(I_n, 0, I_n)
// is the orthogonal projector onto the mean-free subspace, and conjugation
// composed with Psi fixes exactly the states of real fields.
Eigen::MatrixXd conjugacy_projector(int n_state);

// Galerkin convection operator B(omega): row (c,d), column (n,m) holds
//
//   -omega_{c-n,d-m} * (c m - d n) * Lx Ly / (p^2 Ly^2 + q^2 Lx^2),
//
// with (p,q) = (c-n, d-m) required to lie in band and away from (0,0).
// Assembly walks the nonzero modes of omega once per row, so the cost is
// O(N * nnz(omega)).  Rows are filled independently and in parallel.
//
// Structure guaranteed by the coefficient (c m - d n):
//   * the mean row and mean column are empty,
//   * B(omega) is skew-Hermitian whenever omega is a valid state,
//   * B(omega) omega has zero energy pairing: Re <omega, B(omega) omega> = 0.
// omega must satisfy conjugate symmetry (tolerance 1e-12 relative).
SparseCx assemble_convection(const SpectralVorticity& omega, const ModeGrid& grid);

// Derivative of omega -> B(omega) omega at omega_hat, restricted to the
// mean-free subspace: column j equals B(e_j) omega_hat for j != center and
// the center column is zero.  Entry (row (c,d), column (p,q)):
//
//   -omega_hat_{c-p,d-q} * (p d - q c) * Lx Ly / (p^2 Ly^2 + q^2 Lx^2).
//
// Same sparsity walk and cost as assemble_convection.  The operator identity
// linearized(omega_hat) * v == B(v) * omega_hat for mean-free v is covered by
// tests.  The diagonal is structurally empty.
SparseCx assemble_linearized_convection(const SpectralVorticity& omega_hat,
                                        const ModeGrid& grid);

// y = m * x with row-parallel scheduling.  Each output entry is accumulated
// serially within its row, so results do not depend on the thread count.
void sparse_apply(const SparseCx& m, const Eigen::VectorXcd& x, Eigen::VectorXcd& y);

}  // namespace fgda
