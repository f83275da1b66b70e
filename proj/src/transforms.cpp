#include "fgda/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fgda/errors.hpp"

namespace fgda {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// M-th roots of unity e^{sign * 2 pi i k / M}, k = 0..M-1, with the upper
// half mirrored from the lower by exact conjugation.  The mirror makes the
// transforms of conjugate-symmetric data cancel imaginary parts exactly.
std::vector<Cplx> root_table(int m, int sign) {
  std::vector<Cplx> u(m);
  for (int k = 0; k <= m / 2; ++k) {
    const double ang = sign * kTwoPi * k / m;
    u[k] = Cplx(std::cos(ang), std::sin(ang));
  }
  for (int k = m / 2 + 1; k < m; ++k) u[k] = std::conj(u[m - k]);
  return u;
}

inline int mod_index(long long a, int m) {
  const int r = static_cast<int>(a % m);
  return r < 0 ? r + m : r;
}

}  // namespace

SpectralVorticity project_physical_field(const Eigen::MatrixXd& samples,
                                         const ModeGrid& grid) {
  const int m = static_cast<int>(samples.rows());
  if (samples.cols() != samples.rows()) {
    throw ValidationError("sample grid must be square");
  }
  const int min_res = std::max(grid.n1(), grid.n2()) + 1;
  if (m < min_res) {
    throw ValidationError("sample resolution " + std::to_string(m) +
                          " undersamples the mode band, need >= " +
                          std::to_string(min_res));
  }
  const auto u = root_table(m, -1);
  const int h1 = grid.half1(), h2 = grid.half2();

  // Stage 1: transform in x for each retained c and every sample column.
  Eigen::MatrixXcd gx(grid.n1() + 1, m);
#pragma omp parallel for schedule(static)
  for (int ci = 0; ci <= grid.n1(); ++ci) {
    const int c = ci - h1;
    for (int jy = 0; jy < m; ++jy) {
      Cplx acc(0.0, 0.0);
      for (int jx = 0; jx < m; ++jx) {
        acc += samples(jx, jy) * u[mod_index(static_cast<long long>(c) * jx, m)];
      }
      gx(ci, jy) = acc;
    }
  }

  // Stage 2: transform in y and scale by the quadrature weight 1/M^2.
  SpectralVorticity w(grid.size());
  const double scale = 1.0 / (static_cast<double>(m) * m);
#pragma omp parallel for schedule(static)
  for (int ci = 0; ci <= grid.n1(); ++ci) {
    for (int di = 0; di <= grid.n2(); ++di) {
      const int d = di - h2;
      Cplx acc(0.0, 0.0);
      for (int jy = 0; jy < m; ++jy) {
        acc += gx(ci, jy) * u[mod_index(static_cast<long long>(d) * jy, m)];
      }
      w[ci * (grid.n2() + 1) + di] = scale * acc;
    }
  }

  enforce_conjugate_symmetry(w, grid);
  return w;
}

Eigen::MatrixXd evaluate_field(const SpectralVorticity& w, const ModeGrid& grid,
                               int resolution) {
  if (static_cast<int>(w.size()) != grid.size()) {
    throw ValidationError("state length does not match grid size");
  }
  const int min_res = std::max(grid.n1(), grid.n2()) + 1;
  if (resolution < min_res) {
    throw ValidationError("evaluation resolution " + std::to_string(resolution) +
                          " below mode band, need >= " + std::to_string(min_res));
  }
  const int m = resolution;
  const auto u = root_table(m, +1);
  const int h1 = grid.half1(), h2 = grid.half2();

  // Stage 1: sum over d for each retained c and each y sample.
  Eigen::MatrixXcd ty(grid.n1() + 1, m);
#pragma omp parallel for schedule(static)
  for (int ci = 0; ci <= grid.n1(); ++ci) {
    for (int iy = 0; iy < m; ++iy) {
      Cplx acc(0.0, 0.0);
      for (int di = 0; di <= grid.n2(); ++di) {
        const int d = di - h2;
        acc += w[ci * (grid.n2() + 1) + di] *
               u[mod_index(static_cast<long long>(d) * iy, m)];
      }
      ty(ci, iy) = acc;
    }
  }

  // Stage 2: sum over c for each x sample.
  Eigen::MatrixXcd field(m, m);
#pragma omp parallel for schedule(static)
  for (int ix = 0; ix < m; ++ix) {
    for (int iy = 0; iy < m; ++iy) {
      Cplx acc(0.0, 0.0);
      for (int ci = 0; ci <= grid.n1(); ++ci) {
        const int c = ci - h1;
        acc += ty(ci, iy) * u[mod_index(static_cast<long long>(c) * ix, m)];
      }
      field(ix, iy) = acc;
    }
  }

  const double scale = w.size() ? w.cwiseAbs().maxCoeff() : 0.0;
  const double imag_max = field.imag().cwiseAbs().maxCoeff();
  if (imag_max > 1e-10 * scale) {
    throw NumericalError("evaluated field has imaginary residual " +
                         std::to_string(imag_max) +
                         "; state conjugate symmetry is corrupted");
  }
  return field.real();
}

}  // namespace fgda
