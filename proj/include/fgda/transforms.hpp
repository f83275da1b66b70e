#pragma once

#include "fgda/mode_grid.hpp"
#include "fgda/state.hpp"
#include "fgda/types.hpp"

namespace fgda {

// Projects point samples of a real field onto the retained modes.  samples
// must be square, sampled on the uniform periodic grid x_i = i*Lx/M,
// y_j = j*Ly/M with samples(i,j) = f(x_i, y_j) and M >= max(N1,N2)+1 so the
// band is alias-free.  The output has conjugate symmetry and zero mean
// enforced exactly.  For band-limited inputs the projection is exact up to
// roundoff and inverts evaluate_field at matching resolution.
SpectralVorticity project_physical_field(const Eigen::MatrixXd& samples,
                                         const ModeGrid& grid);

// Evaluates the spectral sum on a resolution x resolution uniform grid and
// returns the real part; field(i,j) = f(x_i, y_j).  Throws NumericalError if
// the imaginary residual exceeds 1e-10 * max|w|, which indicates a state with
// corrupted conjugate symmetry.  resolution >= max(N1,N2)+1.
Eigen::MatrixXd evaluate_field(const SpectralVorticity& w, const ModeGrid& grid,
                               int resolution);

}  // namespace fgda
