#include "fgda/state.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fgda/errors.hpp"
#include "fgda/rng.hpp"

namespace fgda {

double conjugate_symmetry_defect(const SpectralVorticity& w, const ModeGrid& grid) {
  const int n = grid.size();
  if (static_cast<int>(w.size()) != n) {
    throw ValidationError("state length " + std::to_string(w.size()) +
                          " does not match grid size " + std::to_string(n));
  }
  double defect = std::abs(w[grid.center()]);
  for (int k = 0; k < n / 2; ++k) {
    defect = std::max(defect, std::abs(w[k] - std::conj(w[n - 1 - k])));
  }
  return defect;
}

bool state_is_valid(const SpectralVorticity& w, const ModeGrid& grid, double tol) {
  const double scale = w.size() ? w.cwiseAbs().maxCoeff() : 0.0;
  const double defect = conjugate_symmetry_defect(w, grid);
  return defect <= tol * std::max(scale, 1.0);
}

void require_valid_state(const SpectralVorticity& w, const ModeGrid& grid,
                         const char* where, double tol) {
  if (!state_is_valid(w, grid, tol)) {
    throw ValidationError(std::string(where) +
                          ": state violates conjugate symmetry, defect = " +
                          std::to_string(conjugate_symmetry_defect(w, grid)));
  }
}

double enforce_conjugate_symmetry(SpectralVorticity& w, const ModeGrid& grid) {
  const int n = grid.size();
  if (static_cast<int>(w.size()) != n) {
    throw ValidationError("state length does not match grid size");
  }
  double corr2 = std::norm(w[grid.center()]);
  w[grid.center()] = Cplx(0.0, 0.0);
  for (int k = 0; k < n / 2; ++k) {
    const int km = n - 1 - k;
    const Cplx avg = 0.5 * (w[k] + std::conj(w[km]));
    corr2 += std::norm(w[k] - avg) + std::norm(w[km] - std::conj(avg));
    w[k] = avg;
    w[km] = std::conj(avg);
  }
  return std::sqrt(corr2);
}

double enstrophy(const SpectralVorticity& w) { return w.squaredNorm(); }

SpectralVorticity random_valid_state(const ModeGrid& grid, PortableRng& rng,
                                     double scale) {
  const int n = grid.size();
  SpectralVorticity w = SpectralVorticity::Zero(n);
  for (int k = 0; k < n / 2; ++k) {
    const Cplx value(rng.uniform(-scale, scale), rng.uniform(-scale, scale));
    w[k] = value;
    w[n - 1 - k] = std::conj(value);
  }
  return w;
}

}  // namespace fgda
