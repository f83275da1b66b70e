#include "fgda/reference_kernels.hpp"

#include <vector>

#include "fgda/errors.hpp"

namespace fgda::reference {

namespace {

double interaction_factor(int p, int q, const ModeGrid& g) {
  const double lx = g.lx(), ly = g.ly();
  return lx * ly /
         (static_cast<double>(p) * p * ly * ly + static_cast<double>(q) * q * lx * lx);
}

}  // namespace

SparseCx assemble_convection(const SpectralVorticity& omega, const ModeGrid& grid) {
  require_valid_state(omega, grid, "reference::assemble_convection");
  const int n = grid.size();
  std::vector<Eigen::Triplet<Cplx>> trips;
  for (int k = 0; k < n; ++k) {
    if (omega[k] == Cplx(0.0, 0.0)) continue;
    const auto pq = grid.mode(k);
    const int p = pq.first, q = pq.second;
    if (p == 0 && q == 0) continue;
    const double kfac = interaction_factor(p, q, grid);
    for (int col = 0; col < n; ++col) {
      const auto nm = grid.mode(col);
      const int cn = nm.first, cm = nm.second;
      if (!grid.in_band(p + cn, q + cm)) continue;
      const int coef = p * cm - q * cn;
      if (coef == 0) continue;
      trips.emplace_back(grid.lin(p + cn, q + cm), col,
                         -omega[k] * static_cast<double>(coef) * kfac);
    }
  }
  SparseCx m(n, n);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

SparseCx assemble_linearized_convection(const SpectralVorticity& omega_hat,
                                        const ModeGrid& grid) {
  require_valid_state(omega_hat, grid, "reference::assemble_linearized_convection");
  const int n = grid.size();
  std::vector<Eigen::Triplet<Cplx>> trips;
  for (int k = 0; k < n; ++k) {
    if (omega_hat[k] == Cplx(0.0, 0.0)) continue;
    const auto hm = grid.mode(k);
    const int hp = hm.first, hq = hm.second;
    if (hp == 0 && hq == 0) continue;
    for (int col = 0; col < n; ++col) {
      const auto pq = grid.mode(col);
      const int p = pq.first, q = pq.second;
      if (p == 0 && q == 0) continue;
      if (!grid.in_band(hp + p, hq + q)) continue;
      const int row_c = hp + p, row_d = hq + q;
      const int coef = p * row_d - q * row_c;
      if (coef == 0) continue;
      trips.emplace_back(grid.lin(row_c, row_d), col,
                         -omega_hat[k] * static_cast<double>(coef) *
                             interaction_factor(p, q, grid));
    }
  }
  SparseCx m(n, n);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

Eigen::MatrixXcd convection_dense(const Eigen::VectorXcd& w, const ModeGrid& grid) {
  const int n = grid.size();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (int row = 0; row < n; ++row) {
    const auto cd = grid.mode(row);
    const int c = cd.first, d = cd.second;
    for (int col = 0; col < n; ++col) {
      const auto nm = grid.mode(col);
      const int p = c - nm.first, q = d - nm.second;
      if ((p == 0 && q == 0) || !grid.in_band(p, q)) continue;
      const int coef = c * nm.second - d * nm.first;
      if (coef == 0) continue;
      m(row, col) =
          -w[grid.lin(p, q)] * static_cast<double>(coef) * interaction_factor(p, q, grid);
    }
  }
  return m;
}

void sparse_apply(const SparseCx& m, const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
  const int rows = static_cast<int>(m.rows());
  y.resize(rows);
  for (int r = 0; r < rows; ++r) {
    Cplx acc(0.0, 0.0);
    for (SparseCx::InnerIterator it(m, r); it; ++it) acc += it.value() * x[it.col()];
    y[r] = acc;
  }
}

}  // namespace fgda::reference
