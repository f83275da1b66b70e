#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "fgda/operators.hpp"
#include "fgda/rng.hpp"
#include "fgda/solvers.hpp"
#include "fgda/state.hpp"

using namespace fgda;

namespace {

Eigen::MatrixXcd random_matrix(int n, PortableRng& rng) {
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      m(i, j) = Cplx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    }
  }
  return m;
}

}  // namespace

TEST_CASE("gmres reproduces a dense direct solve") {
  PortableRng rng(101u);
  const int n = 40;
  // Shifted to keep the system well conditioned.
  Eigen::MatrixXcd a = random_matrix(n, rng);
  a += 6.0 * Eigen::MatrixXcd::Identity(n, n);
  Eigen::VectorXcd rhs(n);
  for (int i = 0; i < n; ++i) {
    rhs[i] = Cplx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  }
  const Eigen::VectorXcd direct = a.fullPivLu().solve(rhs);

  const LinOp op = [&a](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { y = a * x; };
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(n);
  GmresOptions opts;
  opts.rel_tol = 1e-12;
  const GmresReport report = gmres_solve(op, rhs, x, opts);
  CHECK(report.converged);
  CHECK((a * x - rhs).norm() <= 1e-11 * rhs.norm());
  CHECK((x - direct).norm() <= 1e-9 * direct.norm());
}

TEST_CASE("gmres restart path still converges") {
  PortableRng rng(103u);
  const int n = 60;
  Eigen::MatrixXcd a = random_matrix(n, rng);
  a += 8.0 * Eigen::MatrixXcd::Identity(n, n);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Ones(n);
  const LinOp op = [&a](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { y = a * x; };

  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(n);
  GmresOptions opts;
  opts.rel_tol = 1e-11;
  opts.restart = 7;  // force several restart cycles
  opts.max_iters = 500;
  const GmresReport report = gmres_solve(op, rhs, x, opts);
  CHECK(report.converged);
  CHECK((a * x - rhs).norm() <= 1e-10 * rhs.norm());
}

TEST_CASE("gmres warm start finishes in one iteration at the solution") {
  PortableRng rng(107u);
  const int n = 25;
  Eigen::MatrixXcd a = random_matrix(n, rng);
  a += 5.0 * Eigen::MatrixXcd::Identity(n, n);
  Eigen::VectorXcd x_true(n);
  for (int i = 0; i < n; ++i) x_true[i] = Cplx(rng.unit(), rng.unit());
  const Eigen::VectorXcd rhs = a * x_true;
  const LinOp op = [&a](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { y = a * x; };

  Eigen::VectorXcd x = x_true;
  const GmresReport report = gmres_solve(op, rhs, x, GmresOptions{});
  CHECK(report.converged);
  CHECK(report.iterations <= 1);
  CHECK((x - x_true).norm() <= 1e-10 * x_true.norm());
}

TEST_CASE("gmres reports non-convergence honestly") {
  PortableRng rng(109u);
  const int n = 30;
  Eigen::MatrixXcd a = random_matrix(n, rng);
  a += 4.0 * Eigen::MatrixXcd::Identity(n, n);
  const Eigen::VectorXcd rhs = Eigen::VectorXcd::Ones(n);
  const LinOp op = [&a](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { y = a * x; };
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(n);
  GmresOptions opts;
  opts.rel_tol = 1e-14;
  opts.max_iters = 2;
  const GmresReport report = gmres_solve(op, rhs, x, opts);
  CHECK(!report.converged);
  CHECK(report.rel_residual > 1e-14);
}

TEST_CASE("gmres solves a zero right-hand side immediately") {
  const LinOp op = [](const Eigen::VectorXcd& v, Eigen::VectorXcd& y) { y = 2.0 * v; };
  Eigen::VectorXcd x = Eigen::VectorXcd::Ones(4);
  const GmresReport report = gmres_solve(op, Eigen::VectorXcd::Zero(4), x,
                                         GmresOptions{});
  CHECK(report.converged);
  CHECK(x.norm() == 0.0);
}

TEST_CASE("lanczos finds the top eigenvalue of a dense hermitian matrix") {
  PortableRng rng(113u);
  const int n = 120;
  Eigen::MatrixXcd k = random_matrix(n, rng);
  Eigen::MatrixXcd h = 0.5 * (k + k.adjoint());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const double exact = es.eigenvalues().maxCoeff();

  const LinOp op = [&h](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { y = h * x; };
  LanczosOptions opts;
  opts.rel_tol = 1e-10;
  const EigReport report = hermitian_max_eigenvalue(op, n, opts);
  CHECK(report.converged);
  CHECK(report.value == doctest::Approx(exact).epsilon(1e-8));
}

TEST_CASE("lanczos is deterministic for a fixed seed") {
  PortableRng rng(127u);
  const int n = 80;
  Eigen::MatrixXcd k = random_matrix(n, rng);
  Eigen::MatrixXcd h = 0.5 * (k + k.adjoint());
  const LinOp op = [&h](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { y = h * x; };
  const EigReport a = hermitian_max_eigenvalue(op, n);
  const EigReport b = hermitian_max_eigenvalue(op, n);
  CHECK(a.value == b.value);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("lanczos handles a diagonal operator exactly") {
  const int n = 10;
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d[i] = -0.5 * i;
  const LinOp op = [&d](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
    y = d.cast<Cplx>().asDiagonal() * x;
  };
  const EigReport report = hermitian_max_eigenvalue(op, n);
  CHECK(report.converged);
  CHECK(report.value == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("lanczos matches the dense solver on a sparse operator") {
  const ModeGrid g(8, 8, 6.283185307179586, 6.283185307179586);
  PortableRng rng(131u);
  const SpectralVorticity w = random_valid_state(g, rng);
  const SparseCx b1 = assemble_linearized_convection(w, g);
  // Hermitian part of the linearization, the matrix the diagnostics care
  // about.
  const Eigen::MatrixXcd dense =
      Eigen::MatrixXcd(b1) + Eigen::MatrixXcd(b1).adjoint();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense);
  const double exact = es.eigenvalues().maxCoeff();

  const LinOp op = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
    Eigen::VectorXcd t1(x.size()), t2(x.size());
    sparse_apply(b1, x, t1);
    SparseCx b1h = SparseCx(b1.adjoint());
    sparse_apply(b1h, x, t2);
    y = t1 + t2;
  };
  const EigReport report = hermitian_max_eigenvalue(op, g.size());
  CHECK(report.converged);
  CHECK(report.value == doctest::Approx(exact).epsilon(1e-7));
}
