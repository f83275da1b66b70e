#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fgda/errors.hpp"
#include "fgda/observation.hpp"
#include "fgda/rng.hpp"
#include "fgda/state.hpp"
#include "fgda/transforms.hpp"

using namespace fgda;

namespace {
constexpr double kTwoPi = 6.283185307179586;

Trajectory constant_trajectory(const SpectralVorticity& w, int points) {
  Trajectory traj;
  traj.times = Eigen::VectorXd::LinSpaced(points, 0.0, 0.1 * (points - 1));
  traj.states.assign(points, w);
  return traj;
}

}  // namespace

TEST_CASE("pd spec forms and inverse quadratic") {
  const PdSpec s = PdSpec::scaled_identity(4.0, 3);
  CHECK(s.max_eigenvalue() == 4.0);
  Eigen::VectorXcd x(3);
  x << Cplx(2.0, 0.0), Cplx(0.0, 2.0), Cplx(0.0, 0.0);
  CHECK(s.quad_inv(x) == doctest::Approx(2.0).epsilon(1e-14));

  Eigen::VectorXd d(2);
  d << 1.0, 0.5;
  const PdSpec diag = PdSpec::diagonal(d);
  Eigen::VectorXcd y(2);
  y << Cplx(1.0, 0.0), Cplx(1.0, 0.0);
  CHECK(diag.quad_inv(y) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK_THROWS_AS(PdSpec::diagonal(Eigen::VectorXd::Zero(2)), ValidationError);
}

TEST_CASE("mode product symmetrizes offsets") {
  const auto modes = mode_product({0, 1});
  CHECK(modes.size() == 9);  // {-1,0,1} x {-1,0,1}
  CHECK(std::count(modes.begin(), modes.end(), std::pair{0, 0}) == 1);
  CHECK(std::count(modes.begin(), modes.end(), std::pair{-1, 1}) == 1);

  const auto wide = mode_product({0, 1, 2, 3, 6});
  CHECK(wide.size() == 81);  // nine symmetrized offsets in each direction
}

TEST_CASE("selection model validates the observed set") {
  const ModeGrid g(4, 4, kTwoPi, kTwoPi);
  // Not closed under negation.
  CHECK_THROWS_AS(selection_observation(g, {{1, 0}}), ValidationError);
  // Duplicate entry.
  CHECK_THROWS_AS(selection_observation(g, {{1, 0}, {-1, 0}, {1, 0}}),
                  ValidationError);
  // Out of band.
  CHECK_THROWS_AS(selection_observation(g, {{3, 0}, {-3, 0}}), ValidationError);

  const ObservationModel obs = selection_observation(g, {{1, 0}, {-1, 0}, {0, 0}});
  CHECK(obs.is_selection());
  CHECK(obs.observed_count() == 3);
  CHECK(obs.state_dim() == g.size());
  CHECK(std::is_sorted(obs.selected.begin(), obs.selected.end()));

  const Eigen::VectorXd h = obs.hh_diagonal();
  CHECK(h.sum() == 3.0);
  CHECK(h[g.lin(1, 0)] == 1.0);
  CHECK(h[g.lin(0, 0)] == 1.0);
  CHECK(h[g.lin(1, 1)] == 0.0);
}

TEST_CASE("selection apply and adjoint are index maps") {
  const ModeGrid g(2, 2, kTwoPi, kTwoPi);
  const ObservationModel obs = selection_observation(g, {{0, 1}, {0, -1}});
  PortableRng rng(7u);
  const SpectralVorticity w = random_valid_state(g, rng);
  const Eigen::VectorXcd y = obs.apply(w);
  CHECK(y.size() == 2);
  CHECK(y[0] == w[g.lin(0, -1)]);  // rows ordered by linear index
  CHECK(y[1] == w[g.lin(0, 1)]);

  const Eigen::VectorXcd back = obs.adjoint_apply(y);
  CHECK(back.size() == g.size());
  CHECK(back[g.lin(0, 1)] == y[1]);
  CHECK(back[g.lin(1, 1)] == Cplx(0.0, 0.0));

  // H^* H w keeps exactly the observed coefficients.
  const Eigen::VectorXcd hh = obs.adjoint_apply(obs.apply(w));
  CHECK(hh[g.lin(0, 1)] == w[g.lin(0, 1)]);
  CHECK(hh[g.lin(1, 0)] == Cplx(0.0, 0.0));
}

TEST_CASE("kernel model rows sample the field") {
  const ModeGrid g(4, 4, kTwoPi, kTwoPi);
  const std::vector<std::pair<double, double>> points = {{1.0, 2.0}, {4.0, 0.5}};
  const ObservationModel obs = kernel_observation(g, points);
  CHECK(!obs.is_selection());
  CHECK(obs.observed_count() == 2);

  PortableRng rng(9u);
  const SpectralVorticity w = random_valid_state(g, rng);
  const Eigen::VectorXcd y = obs.apply(w);
  // Row i evaluates the band-limited field at (x_i, y_i); compare against the
  // direct spectral sum read off a fine evaluation grid is not possible at
  // arbitrary points, so sum the series directly.
  for (int i = 0; i < 2; ++i) {
    Cplx direct(0.0, 0.0);
    for (int k = 0; k < g.size(); ++k) {
      const auto [c, d] = g.mode(k);
      const double phase = kTwoPi * (c * points[i].first / g.lx() +
                                     d * points[i].second / g.ly());
      direct += w[k] * Cplx(std::cos(phase), std::sin(phase));
    }
    CHECK(std::abs(y[i] - direct) < 1e-12);
    CHECK(std::abs(y[i].imag()) < 1e-12);  // real field, real samples
  }

  CHECK_THROWS_AS(obs.hh_diagonal(), ValidationError);
  const Eigen::MatrixXcd hh = obs.hh_dense();
  CHECK((hh - hh.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("observation noise is seeded, bounded, and conjugate paired") {
  const ModeGrid g(6, 6, kTwoPi, kTwoPi);
  const ObservationModel obs = selection_observation(g, mode_product({0, 1, 2}));
  PortableRng rng(11u);
  const SpectralVorticity w = random_valid_state(g, rng, 0.5);
  const Trajectory traj = constant_trajectory(w, 4);

  const double amplitude = 0.3;
  const ObservationSeries s1 = generate_observations(traj, obs, g, amplitude, 77u);
  const ObservationSeries s2 = generate_observations(traj, obs, g, amplitude, 77u);
  const ObservationSeries s3 = generate_observations(traj, obs, g, amplitude, 78u);
  CHECK((s1.values - s2.values).cwiseAbs().maxCoeff() == 0.0);
  CHECK((s1.values - s3.values).cwiseAbs().maxCoeff() > 0.0);
  CHECK(s1.noise_law.find("mt19937_64/u53") != std::string::npos);

  const double per_part = amplitude / std::sqrt(static_cast<double>(g.size()));
  for (int t = 0; t < s1.values.cols(); ++t) {
    const Eigen::VectorXcd eta = s1.values.col(t) - obs.apply(w);
    for (int i = 0; i < obs.observed_count(); ++i) {
      CHECK(std::abs(eta[i].real()) <= per_part);
      CHECK(std::abs(eta[i].imag()) <= per_part);
    }
    // Pairing: noise at a row and at its mirrored row are conjugates, so the
    // noisy data still describes a real field.
    for (int i = 0; i < obs.observed_count(); ++i) {
      const int partner_index = g.mirror(obs.selected[i]);
      const auto partner = std::find(obs.selected.begin(), obs.selected.end(),
                                     partner_index);
      REQUIRE(partner != obs.selected.end());
      const int pi = static_cast<int>(partner - obs.selected.begin());
      CHECK(std::abs(eta[i] - std::conj(eta[pi])) < 1e-15);
    }
  }
}

TEST_CASE("literal noise interval keeps the asymmetric upper bound") {
  const ModeGrid g(6, 6, kTwoPi, kTwoPi);
  const ObservationModel obs = selection_observation(g, mode_product({0, 1}));
  PortableRng rng(13u);
  const SpectralVorticity w = random_valid_state(g, rng, 0.5);
  const Trajectory traj = constant_trajectory(w, 40);

  const double amplitude = 0.2;
  const double root_n = std::sqrt(static_cast<double>(g.size()));
  const ObservationSeries lit =
      generate_observations(traj, obs, g, amplitude, 99u, true);
  double largest = 0.0;
  for (int t = 0; t < lit.values.cols(); ++t) {
    const Eigen::VectorXcd eta = lit.values.col(t) - obs.apply(w);
    for (int i = 0; i < eta.size(); ++i) {
      CHECK(eta[i].real() >= -amplitude / root_n - 1e-15);
      CHECK(eta[i].real() <= amplitude * root_n + 1e-15);
      largest = std::max(largest, std::abs(eta[i].real()));
    }
  }
  // The wide upper half of the interval actually gets used.
  CHECK(largest > amplitude / root_n);
  CHECK(lit.noise_law.find("literal") != std::string::npos);
}

TEST_CASE("ellipsoid containment margin") {
  UncertaintyEllipsoid e;
  e.s = PdSpec::scaled_identity(1.0, 2);
  e.q = PdSpec::scaled_identity(1.0, 2);
  e.r = PdSpec::scaled_identity(1.0, 2);

  Eigen::VectorXcd inside(2);
  inside << Cplx(0.6, 0.0), Cplx(0.0, 0.0);
  const ContainmentReport ok = ellipsoid_contains(e, inside, {}, {});
  CHECK(ok.contained);
  CHECK(ok.margin == doctest::Approx(1.0 - 0.36).epsilon(1e-12));

  Eigen::VectorXcd outside(2);
  outside << Cplx(1.2, 0.0), Cplx(0.0, 0.0);
  const ContainmentReport bad = ellipsoid_contains(e, inside, {outside}, {});
  CHECK(!bad.contained);
  CHECK(bad.margin < 0.0);
}
