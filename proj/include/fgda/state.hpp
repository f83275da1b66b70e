#pragma once

#include "fgda/mode_grid.hpp"
#include "fgda/types.hpp"

namespace fgda {

// A spectral vorticity state is a complex coefficient vector over the mode
// grid.  To represent a real mean-free field it must satisfy
//   coeff(lin(-c,-d)) == conj(coeff(lin(c,d)))   (conjugate pairing)
//   coeff(center)     == 0                       (zero spatial mean)
// Helpers below measure and restore those invariants; the integrators call
// enforce_conjugate_symmetry after every linear solve to stop roundoff from
// accumulating a complex drift.
using SpectralVorticity = Eigen::VectorXcd;

// Largest deviation from conjugate pairing plus the mean-mode magnitude,
// taken as an absolute max-norm.
double conjugate_symmetry_defect(const SpectralVorticity& w, const ModeGrid& grid);

// True when the defect is within tol relative to max|w| (absolute for w = 0).
bool state_is_valid(const SpectralVorticity& w, const ModeGrid& grid,
                    double tol = 1e-12);

// Throws ValidationError when state_is_valid fails; `where` names the caller.
void require_valid_state(const SpectralVorticity& w, const ModeGrid& grid,
                         const char* where, double tol = 1e-12);

// Projects onto the valid subspace (pairwise conjugate average, zero mean)
// and returns the Euclidean norm of the applied correction.
double enforce_conjugate_symmetry(SpectralVorticity& w, const ModeGrid& grid);

// Squared coefficient norm.  By the Parseval relation for the mode basis this
// equals the spatial mean-square vorticity, so it serves as the enstrophy
// surrogate tracked by the dynamics tests.
double enstrophy(const SpectralVorticity& w);

class PortableRng;

// Draws a valid state with independent uniform(-scale, scale) real and
// imaginary parts on the lower half of the mode list and the conjugate
// mirror filled in; the mean mode stays zero.
SpectralVorticity random_valid_state(const ModeGrid& grid, PortableRng& rng,
                                     double scale = 1.0);

}  // namespace fgda
