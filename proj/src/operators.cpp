#include "fgda/operators.hpp"

#include <cassert>
#include <cmath>
#include <vector>

#include "fgda/errors.hpp"

namespace fgda {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// One nonzero coefficient of the state driving an assembly.  Entries are
// listed in descending linear order so that the emitted column indices
// (row - offset) ascend within each row, which lets both assemblers write
// compressed rows directly.
struct NonzeroMode {
  int p, q;
  int offset;   // lin(p,q) - lin(0,0)
  Cplx value;
  double kfac;  // Lx*Ly / (p^2 Ly^2 + q^2 Lx^2)
};

std::vector<NonzeroMode> nonzero_modes(const SpectralVorticity& w, const ModeGrid& g) {
  std::vector<NonzeroMode> list;
  list.reserve(static_cast<std::size_t>(w.size()));
  const double lx = g.lx(), ly = g.ly();
  for (int k = g.size() - 1; k >= 0; --k) {
    if (w[k] == Cplx(0.0, 0.0)) continue;
    const auto cd = g.mode(k);
    const int p = cd.first, q = cd.second;
    if (p == 0 && q == 0) continue;
    NonzeroMode e;
    e.p = p;
    e.q = q;
    e.offset = p * (g.n2() + 1) + q;
    e.value = w[k];
    e.kfac = lx * ly /
             (static_cast<double>(p) * p * ly * ly + static_cast<double>(q) * q * lx * lx);
    list.push_back(e);
  }
  return list;
}

enum class Kind { kConvection, kLinearized };

// Decides whether the pair (row r, state mode e) contributes an entry, and
// if so computes its column and value.  Shared by the count and fill passes
// so their sparsity patterns cannot drift apart.
template <Kind kind>
inline bool emit_entry(int c, int d, const NonzeroMode& e, const ModeGrid& g,
                       double lx, double ly, int* col_delta, Cplx* value) {
  const int tp = c - e.p, tq = d - e.q;
  if (tp < -g.half1() || tp > g.half1() || tq < -g.half2() || tq > g.half2()) {
    return false;
  }
  if constexpr (kind == Kind::kConvection) {
    // Column mode is (tp,tq); interaction factor comes from the state mode.
    const int coef = e.p * d - e.q * c;
    if (coef == 0) return false;
    *value = -e.value * static_cast<double>(coef) * e.kfac;
  } else {
    // Column mode is (tp,tq) and also carries the interaction factor.
    if (tp == 0 && tq == 0) return false;
    const int coef = tp * d - tq * c;
    if (coef == 0) return false;
    const double kfac =
        lx * ly /
        (static_cast<double>(tp) * tp * ly * ly + static_cast<double>(tq) * tq * lx * lx);
    *value = -e.value * static_cast<double>(coef) * kfac;
  }
  *col_delta = e.offset;
  return true;
}

template <Kind kind>
SparseCx assemble_impl(const SpectralVorticity& w, const ModeGrid& g, const char* where) {
  require_valid_state(w, g, where);
  const int n = g.size();
  const auto nz = nonzero_modes(w, g);
  const double lx = g.lx(), ly = g.ly();

  SparseCx m(n, n);
  std::vector<int> counts(n, 0);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < n; ++r) {
    const auto cd = g.mode(r);
    int cnt = 0;
    int col_delta;
    Cplx value;
    for (const auto& e : nz) {
      if (emit_entry<kind>(cd.first, cd.second, e, g, lx, ly, &col_delta, &value)) ++cnt;
    }
    counts[r] = cnt;
  }

  auto* outer = m.outerIndexPtr();
  outer[0] = 0;
  for (int r = 0; r < n; ++r) outer[r + 1] = outer[r] + counts[r];
  m.resizeNonZeros(outer[n]);
  auto* inner = m.innerIndexPtr();
  auto* vals = m.valuePtr();

#pragma omp parallel for schedule(static)
  for (int r = 0; r < n; ++r) {
    const auto cd = g.mode(r);
    int pos = outer[r];
    int col_delta;
    Cplx value;
    for (const auto& e : nz) {
      if (emit_entry<kind>(cd.first, cd.second, e, g, lx, ly, &col_delta, &value)) {
        inner[pos] = r - col_delta;
        vals[pos] = value;
        ++pos;
      }
    }
    assert(pos == outer[r + 1]);
  }
  return m;
}

}  // namespace

Eigen::VectorXd laplacian_spectrum(const ModeGrid& grid) {
  const int n = grid.size();
  Eigen::VectorXd lambda(n);
  const double fx = kTwoPi * kTwoPi / (grid.lx() * grid.lx());
  const double fy = kTwoPi * kTwoPi / (grid.ly() * grid.ly());
  for (int k = 0; k < n; ++k) {
    const auto cd = grid.mode(k);
    lambda[k] = fx * cd.first * cd.first + fy * cd.second * cd.second;
  }
  return lambda;
}

Eigen::VectorXd diffusion_diagonal(const ModeGrid& grid, double nu) {
  if (!(nu > 0.0)) throw ValidationError("viscosity must be positive");
  return -nu * laplacian_spectrum(grid);
}

Eigen::VectorXcd mean_flow_diagonal(const ModeGrid& grid, double u_mean, double v_mean) {
  const int n = grid.size();
  Eigen::VectorXcd diag(n);
  for (int k = 0; k < n; ++k) {
    const auto cd = grid.mode(k);
    const double val =
        kTwoPi * (cd.first * u_mean / grid.lx() - cd.second * v_mean / grid.ly());
    diag[k] = Cplx(0.0, -val);
  }
  return diag;
}

Eigen::MatrixXd conjugacy_projector(int n_state) {
  if (n_state <= 0 || n_state % 2 == 0) {
    throw ValidationError("conjugacy projector needs an odd positive dimension");
  }
  const int n = (n_state - 1) / 2;
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(n_state, n_state);
  for (int k = 0; k < n; ++k) {
    psi(k, k) = s;
    psi(k, n_state - 1 - k) = s;
    psi(n_state - 1 - k, k) = s;
    psi(n_state - 1 - k, n_state - 1 - k) = -s;
  }
  return psi;
}

SparseCx assemble_convection(const SpectralVorticity& omega, const ModeGrid& grid) {
  return assemble_impl<Kind::kConvection>(omega, grid, "assemble_convection");
}

SparseCx assemble_linearized_convection(const SpectralVorticity& omega_hat,
                                        const ModeGrid& grid) {
  return assemble_impl<Kind::kLinearized>(omega_hat, grid,
                                          "assemble_linearized_convection");
}

void sparse_apply(const SparseCx& m, const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
  assert(m.isCompressed());
  const int rows = static_cast<int>(m.rows());
  y.resize(rows);
  const auto* outer = m.outerIndexPtr();
  const auto* inner = m.innerIndexPtr();
  const auto* vals = m.valuePtr();
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    Cplx acc(0.0, 0.0);
    for (auto i = outer[r]; i < outer[r + 1]; ++i) acc += vals[i] * x[inner[i]];
    y[r] = acc;
  }
}

}  // namespace fgda
