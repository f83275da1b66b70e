#include "fgda/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fgda/errors.hpp"
#include "fgda/rng.hpp"

namespace fgda {

namespace {

// Unitary rotation [c, s; -conj(s), c] with real c that zeroes the second
// component of (a, b).
void make_givens(Cplx a, Cplx b, double* c, Cplx* s) {
  const double absa = std::abs(a), absb = std::abs(b);
  if (absb == 0.0) {
    *c = 1.0;
    *s = Cplx(0.0, 0.0);
    return;
  }
  if (absa == 0.0) {
    *c = 0.0;
    *s = b == Cplx(0.0, 0.0) ? Cplx(1.0, 0.0) : std::conj(b) / absb;
    return;
  }
  const double r = std::hypot(absa, absb);
  *c = absa / r;
  *s = (a / absa) * std::conj(b) / r;
}

}  // namespace

GmresReport gmres_solve(const LinOp& op, const Eigen::VectorXcd& rhs,
                        Eigen::VectorXcd& x, const GmresOptions& opts) {
  const int n = static_cast<int>(rhs.size());
  if (x.size() != rhs.size()) {
    x = Eigen::VectorXcd::Zero(n);
  }
  const double bnorm = rhs.norm();
  GmresReport rep;
  if (bnorm == 0.0) {
    x.setZero();
    rep.converged = true;
    return rep;
  }

  const int restart = std::max(1, std::min(opts.restart, n));
  Eigen::VectorXcd w(n), r(n);
  std::vector<Eigen::VectorXcd> basis;
  basis.reserve(restart + 1);
  Eigen::MatrixXcd hess = Eigen::MatrixXcd::Zero(restart + 1, restart);
  Eigen::VectorXcd g(restart + 1);
  std::vector<double> gc(restart);
  std::vector<Cplx> gs(restart);

  while (rep.iterations < opts.max_iters) {
    op(x, w);
    r = rhs - w;
    double beta = r.norm();
    rep.rel_residual = beta / bnorm;
    if (rep.rel_residual <= opts.rel_tol) {
      rep.converged = true;
      return rep;
    }

    basis.clear();
    basis.push_back(r / beta);
    g.setZero();
    g[0] = beta;
    int k = 0;
    for (; k < restart && rep.iterations < opts.max_iters; ++k, ++rep.iterations) {
      op(basis[k], w);
      for (int i = 0; i <= k; ++i) {
        const Cplx h = basis[i].dot(w);
        hess(i, k) = h;
        w -= h * basis[i];
      }
      const double hk1 = w.norm();
      hess(k + 1, k) = hk1;

      for (int i = 0; i < k; ++i) {
        const Cplx t = hess(i, k);
        hess(i, k) = gc[i] * t + gs[i] * hess(i + 1, k);
        hess(i + 1, k) = -std::conj(gs[i]) * t + gc[i] * hess(i + 1, k);
      }
      make_givens(hess(k, k), hess(k + 1, k), &gc[k], &gs[k]);
      hess(k, k) = gc[k] * hess(k, k) + gs[k] * hess(k + 1, k);
      hess(k + 1, k) = Cplx(0.0, 0.0);
      const Cplx gk = g[k];
      g[k] = gc[k] * gk;
      g[k + 1] = -std::conj(gs[k]) * gk;

      rep.rel_residual = std::abs(g[k + 1]) / bnorm;
      if (rep.rel_residual <= opts.rel_tol || hk1 == 0.0) {
        ++k;
        ++rep.iterations;
        break;
      }
      basis.push_back(w / hk1);
    }

    // Back-substitute H y = g over the k columns built so far.
    Eigen::VectorXcd y(k);
    for (int i = k - 1; i >= 0; --i) {
      Cplx acc = g[i];
      for (int j = i + 1; j < k; ++j) acc -= hess(i, j) * y[j];
      y[i] = acc / hess(i, i);
    }
    for (int i = 0; i < k; ++i) x += y[i] * basis[i];

    if (rep.rel_residual <= opts.rel_tol) {
      rep.converged = true;
      return rep;
    }
  }
  return rep;
}

EigReport hermitian_max_eigenvalue(const LinOp& op, int n, const LanczosOptions& opts) {
  if (n <= 0) throw ValidationError("eigenvalue iteration needs dimension >= 1");
  PortableRng rng(opts.seed);
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v[i] = Cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
  v /= v.norm();

  const int maxdim = std::min(opts.max_dim, n);
  std::vector<Eigen::VectorXcd> basis;
  basis.reserve(maxdim);
  std::vector<double> alpha, beta;
  Eigen::VectorXcd w(n);

  EigReport rep;
  basis.push_back(v);
  for (int j = 0; j < maxdim; ++j) {
    op(basis[j], w);
    // Two reorthogonalization sweeps keep the basis orthonormal to machine
    // precision, which this routine needs more than it needs speed.
    for (int sweep = 0; sweep < 2; ++sweep) {
      for (int i = 0; i <= j; ++i) {
        const Cplx h = basis[i].dot(w);
        if (sweep == 0 && i == j) alpha.push_back(std::real(h));
        w -= h * basis[i];
      }
    }
    const double b = w.norm();
    rep.iterations = j + 1;

    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(j + 1, j + 1);
    for (int i = 0; i <= j; ++i) {
      tri(i, i) = alpha[i];
      if (i > 0) tri(i, i - 1) = tri(i - 1, i) = beta[i - 1];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
    int top;
    es.eigenvalues().maxCoeff(&top);
    rep.value = es.eigenvalues()[top];
    const double last = std::abs(es.eigenvectors()(j, top));
    rep.residual = b * last;

    double scale = 0.0;
    for (double a : alpha) scale = std::max(scale, std::abs(a));
    for (double bb : beta) scale = std::max(scale, std::abs(bb));
    scale = std::max(scale, b);
    if (rep.residual <= opts.rel_tol * std::max(scale, 1e-300) || b == 0.0) {
      rep.converged = true;
      return rep;
    }
    if (j + 1 < maxdim) {
      beta.push_back(b);
      basis.push_back(w / b);
    }
  }
  rep.converged = rep.residual <= opts.rel_tol * 1.0;
  return rep;
}

}  // namespace fgda
