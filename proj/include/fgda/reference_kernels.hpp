#pragma once

#include "fgda/mode_grid.hpp"
#include "fgda/state.hpp"
#include "fgda/types.hpp"

namespace fgda::reference {

// Serial reference implementations of the parallel kernels.  They use a
// different construction route (triplet lists in product-mode order instead
// of direct compressed rows) so the optimized versions can be checked against
// them entry for entry; the benchmark target times the two side by side.

SparseCx assemble_convection(const SpectralVorticity& omega, const ModeGrid& grid);

SparseCx assemble_linearized_convection(const SpectralVorticity& omega_hat,
                                        const ModeGrid& grid);

// Convection entry formula applied verbatim to an arbitrary coefficient
// vector, without the valid-state gate of the production assembler.  Needed
// to evaluate the linearization columns B(Psi e_k) whose arguments are not
// conjugate-symmetric on their own.
Eigen::MatrixXcd convection_dense(const Eigen::VectorXcd& w, const ModeGrid& grid);

void sparse_apply(const SparseCx& m, const Eigen::VectorXcd& x, Eigen::VectorXcd& y);

}  // namespace fgda::reference
