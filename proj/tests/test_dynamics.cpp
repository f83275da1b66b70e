#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "fgda/dynamics.hpp"
#include "fgda/errors.hpp"
#include "fgda/operators.hpp"
#include "fgda/rng.hpp"
#include "fgda/state.hpp"

using namespace fgda;

namespace {
constexpr double kTwoPi = 6.283185307179586;
}

TEST_CASE("midpoint step has the exact scalar update") {
  // x' = -x with dt = 0.1: one step multiplies by 0.95/1.05.
  const LinOp op = [](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { y = -x; };
  Eigen::VectorXcd x(1);
  x[0] = Cplx(2.0, 0.0);
  const Eigen::VectorXcd zero_f = Eigen::VectorXcd::Zero(1);
  GmresOptions opts;
  opts.rel_tol = 1e-14;
  const Eigen::VectorXcd next = midpoint_step(x, op, zero_f, 0.1, opts);
  CHECK(std::abs(next[0] - Cplx(2.0 * 0.95 / 1.05, 0.0)) < 1e-13);
}

TEST_CASE("midpoint step handles the forcing average") {
  // x' = -x + 1 from x = 0: exact step value dt / (1 + dt/2).
  const LinOp op = [](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { y = -x; };
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(1);
  Eigen::VectorXcd f(1);
  f[0] = Cplx(1.0, 0.0);
  GmresOptions opts;
  opts.rel_tol = 1e-14;
  const Eigen::VectorXcd next = midpoint_step(x, op, f, 0.2, opts);
  CHECK(std::abs(next[0] - Cplx(0.2 / 1.1, 0.0)) < 1e-13);
}

TEST_CASE("midpoint is second order against the matrix exponential") {
  PortableRng rng(3u);
  const int n = 15;
  Eigen::MatrixXcd k(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      k(i, j) = Cplx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    }
  }
  Eigen::MatrixXcd m = 0.5 * (k - k.adjoint());
  for (int i = 0; i < n; ++i) m(i, i) += Cplx(-rng.unit(), 0.0);
  Eigen::VectorXcd x0(n);
  for (int i = 0; i < n; ++i) {
    x0[i] = Cplx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  }

  const double t_final = 0.5;
  const Eigen::VectorXcd exact = (t_final * m).exp() * x0;
  const LinOp op = [&m](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { y = m * x; };
  GmresOptions opts;
  opts.rel_tol = 1e-13;
  const Eigen::VectorXcd zero_f = Eigen::VectorXcd::Zero(n);

  auto err_at = [&](int steps) {
    Eigen::VectorXcd x = x0;
    for (int s = 0; s < steps; ++s) {
      x = midpoint_step(x, op, zero_f, t_final / steps, opts);
    }
    return (x - exact).norm();
  };
  const double ratio = err_at(10) / err_at(20);
  CHECK(ratio > 3.6);
  CHECK(ratio < 4.4);
}

TEST_CASE("midpoint step reports convergence failure") {
  const LinOp op = [](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { y = -x; };
  Eigen::VectorXcd x(1);
  x[0] = Cplx(1.0, 0.0);
  const Eigen::VectorXcd zero_f = Eigen::VectorXcd::Zero(1);
  GmresOptions opts;
  opts.rel_tol = 1e-14;
  opts.max_iters = 0;  // starve the solver
  CHECK_THROWS_AS(midpoint_step(x, op, zero_f, 0.1, opts), NumericalError);
}

TEST_CASE("pure convection conserves enstrophy over many steps") {
  const ModeGrid g(8, 8, kTwoPi, kTwoPi);
  PortableRng rng(7u);
  SpectralVorticity w = random_valid_state(g, rng, 0.4);
  const double e0 = enstrophy(w);
  GmresOptions opts;
  opts.rel_tol = 1e-11;
  const Eigen::VectorXcd zero_f = Eigen::VectorXcd::Zero(g.size());
  double worst = 0.0;
  for (int step = 0; step < 100; ++step) {
    const SparseCx b = assemble_convection(w, g);
    const LinOp op = [&b](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
      sparse_apply(b, x, y);
    };
    w = midpoint_step(w, op, zero_f, 0.05, opts);
    enforce_conjugate_symmetry(w, g);
    worst = std::max(worst, std::abs(enstrophy(w) - e0) / e0);
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("viscous unforced flow dissipates enstrophy monotonically") {
  const ModeGrid g(8, 8, kTwoPi, kTwoPi);
  PortableRng rng(11u);
  const SpectralVorticity w0 = random_valid_state(g, rng, 0.4);
  GmresOptions opts;
  opts.rel_tol = 1e-11;
  const Trajectory traj = simulate_truth(w0, no_forcing(g), 0.005, g, 0.05, 5.0, opts);
  const double e0 = enstrophy(traj.states.front());
  for (std::size_t s = 1; s < traj.states.size(); ++s) {
    CHECK(enstrophy(traj.states[s]) - enstrophy(traj.states[s - 1]) <= 1e-10 * e0);
  }
  CHECK(enstrophy(traj.states.back()) < e0);
  CHECK(traj.max_symmetry_correction < 1e-9);
}

TEST_CASE("simulated trajectory keeps valid states and a uniform clock") {
  const ModeGrid g(4, 4, kTwoPi, kTwoPi);
  PortableRng rng(13u);
  const SpectralVorticity w0 = random_valid_state(g, rng, 0.3);
  const Trajectory traj =
      simulate_truth(w0, paired_mode_forcing(g, 1), 0.01, g, 0.1, 1.0);
  CHECK(traj.states.size() == 11);
  CHECK(traj.times.size() == 11);
  for (int s = 0; s < 11; ++s) {
    CHECK(traj.times[s] == doctest::Approx(0.1 * s).epsilon(1e-12));
    CHECK(state_is_valid(traj.states[s], g, 1e-10));
  }
  // t_final off the step lattice is rejected.
  CHECK_THROWS_AS(simulate_truth(w0, no_forcing(g), 0.01, g, 0.1, 1.03),
                  ValidationError);
}

TEST_CASE("forcing mask selects the conjugate pair with half-offset amplitude") {
  const ModeGrid g(16, 16, kTwoPi, kTwoPi);
  const int offset = 6;
  const ForcingSpec f = paired_mode_forcing(g, offset);

  int hits = 0;
  for (int k = 0; k < g.size(); ++k) {
    if (f.d_diagonal[k] != 0.0) {
      ++hits;
      CHECK(f.d_diagonal[k] == 1.0);
      const auto [c, d] = g.mode(k);
      CHECK(c == 0);
      CHECK(std::abs(d) == offset);
    }
  }
  CHECK(hits == 2);
  CHECK(f.amplitude.size() == g.size());
  for (int k = 0; k < g.size(); ++k) {
    CHECK(f.amplitude[k] == Cplx(offset / 2.0, 0.0));
  }
  CHECK(f.amplitude_norm() == doctest::Approx(3.0 * 17.0).epsilon(1e-14));
  CHECK(state_is_valid(f.df_at(0.0), g));

  CHECK_THROWS_AS(paired_mode_forcing(g, 0), ValidationError);
  CHECK_THROWS_AS(paired_mode_forcing(g, 9), ValidationError);
}

TEST_CASE("default initial profile is the three-bump field") {
  // Center of the domain maps to the profile origin, where the second bump
  // dominates: value 3*exp(-1) - 0 - exp(-1)/3 at (u,v) = (0,0) shifted by
  // the formula's own offsets.
  const double lx = kTwoPi, ly = kTwoPi;
  const double center = default_initial_field(lx / 2, ly / 2, lx, ly);
  const double expected =
      3.0 * std::exp(-1.0) - (1.0 / 3.0) * std::exp(-1.0);
  CHECK(center == doctest::Approx(expected).epsilon(1e-12));
  // Far corner: all bumps decay to roughly zero.
  CHECK(std::abs(default_initial_field(0.05, 0.05, lx, ly)) < 1e-4);
}

TEST_CASE("forced simulation feeds energy through the mask") {
  const ModeGrid g(8, 8, kTwoPi, kTwoPi);
  const SpectralVorticity w0 = SpectralVorticity::Zero(g.size());
  const Trajectory traj =
      simulate_truth(w0, paired_mode_forcing(g, 2), 0.1, g, 0.05, 1.0);
  CHECK(enstrophy(traj.states.back()) > 0.0);
  // Energy enters only at the forced pair and spreads by convection; the
  // forced coefficients must dominate early.
  const SpectralVorticity& w1 = traj.states[1];
  const double forced = std::abs(w1[g.lin(0, 2)]);
  CHECK(forced > 0.0);
  for (int k = 0; k < g.size(); ++k) {
    if (k != g.lin(0, 2) && k != g.lin(0, -2)) {
      CHECK(std::abs(w1[k]) <= forced + 1e-12);
    }
  }
}
