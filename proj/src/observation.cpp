#include "fgda/observation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "fgda/errors.hpp"
#include "fgda/rng.hpp"

namespace fgda {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

PdSpec PdSpec::scaled_identity(double s, int n) {
  if (!(s > 0.0)) throw ValidationError("positive definite scale must be > 0");
  PdSpec p;
  p.diag = Eigen::VectorXd::Constant(n, s);
  return p;
}

PdSpec PdSpec::diagonal(Eigen::VectorXd d) {
  if (d.size() == 0 || (d.array() <= 0.0).any()) {
    throw ValidationError("positive definite diagonal must be nonempty and positive");
  }
  PdSpec p;
  p.diag = std::move(d);
  return p;
}

double PdSpec::quad_inv(const Eigen::VectorXcd& x) const {
  if (x.size() != diag.size()) {
    throw ValidationError("quadratic form dimension mismatch");
  }
  double acc = 0.0;
  for (int i = 0; i < x.size(); ++i) acc += std::norm(x[i]) / diag[i];
  return acc;
}

Eigen::VectorXcd ObservationModel::apply(const Eigen::VectorXcd& w) const {
  if (static_cast<int>(w.size()) != n_state) {
    throw ValidationError("observation apply: state dimension mismatch");
  }
  if (is_selection()) {
    Eigen::VectorXcd y(selected.size());
    for (std::size_t i = 0; i < selected.size(); ++i) y[i] = w[selected[i]];
    return y;
  }
  return rows * w;
}

Eigen::VectorXcd ObservationModel::adjoint_apply(const Eigen::VectorXcd& y) const {
  if (y.size() != observed_count()) {
    throw ValidationError("observation adjoint: observation dimension mismatch");
  }
  if (is_selection()) {
    Eigen::VectorXcd w = Eigen::VectorXcd::Zero(n_state);
    for (std::size_t i = 0; i < selected.size(); ++i) w[selected[i]] = y[i];
    return w;
  }
  return rows.adjoint() * y;
}

Eigen::VectorXd ObservationModel::hh_diagonal() const {
  if (!is_selection()) {
    throw ValidationError("H^*H is not diagonal for dense-row observation models");
  }
  Eigen::VectorXd h = Eigen::VectorXd::Zero(n_state);
  for (int k : selected) h[k] = 1.0;
  return h;
}

Eigen::MatrixXcd ObservationModel::hh_dense() const {
  if (is_selection()) {
    return hh_diagonal().cast<Cplx>().asDiagonal();
  }
  return rows.adjoint() * rows;
}

ObservationModel selection_observation(const ModeGrid& grid,
                                       const std::vector<std::pair<int, int>>& modes) {
  if (modes.empty()) throw ValidationError("observation mode set is empty");
  std::set<int> lins;
  for (const auto& [c, d] : modes) {
    if (!grid.in_band(c, d)) {
      throw ValidationError("observed mode (" + std::to_string(c) + "," +
                            std::to_string(d) + ") outside the band");
    }
    if (!lins.insert(grid.lin(c, d)).second) {
      throw ValidationError("observed mode (" + std::to_string(c) + "," +
                            std::to_string(d) + ") listed twice");
    }
  }
  for (int k : lins) {
    if (!lins.count(grid.mirror(k))) {
      const auto cd = grid.mode(k);
      throw ValidationError("observed set not closed under negation: (" +
                            std::to_string(cd.first) + "," + std::to_string(cd.second) +
                            ") present without its conjugate partner");
    }
  }

  ObservationModel m;
  m.n_state = grid.size();
  m.selected.assign(lins.begin(), lins.end());
  for (int k : m.selected) m.selected_modes.push_back(grid.mode(k));
  m.noise_bound = PdSpec::scaled_identity(1.0, static_cast<int>(m.selected.size()));
  return m;
}

std::vector<std::pair<int, int>> mode_product(const std::vector<int>& offsets) {
  std::set<int> sym;
  for (int v : offsets) {
    sym.insert(v);
    sym.insert(-v);
  }
  std::vector<std::pair<int, int>> modes;
  for (int c : sym) {
    for (int d : sym) modes.emplace_back(c, d);
  }
  return modes;
}

ObservationModel kernel_observation(const ModeGrid& grid,
                                    const std::vector<std::pair<double, double>>& points) {
  if (points.empty()) throw ValidationError("kernel observation needs sample points");
  ObservationModel m;
  m.n_state = grid.size();
  m.rows.resize(points.size(), grid.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double x = points[i].first, y = points[i].second;
    for (int k = 0; k < grid.size(); ++k) {
      const auto cd = grid.mode(k);
      const double phase =
          kTwoPi * (cd.first * x / grid.lx() + cd.second * y / grid.ly());
      m.rows(i, k) = Cplx(std::cos(phase), std::sin(phase));
    }
  }
  m.noise_bound = PdSpec::scaled_identity(1.0, static_cast<int>(points.size()));
  return m;
}

ObservationSeries generate_observations(const Trajectory& traj,
                                        const ObservationModel& model,
                                        const ModeGrid& grid, double amplitude,
                                        std::uint64_t seed, bool literal_interval) {
  if (traj.states.empty()) throw ValidationError("trajectory is empty");
  if (amplitude < 0.0) throw ValidationError("noise amplitude must be >= 0");
  const int mcount = model.observed_count();
  const int cols = static_cast<int>(traj.states.size());

  ObservationSeries series;
  series.times = traj.times;
  series.values.resize(mcount, cols);
  series.seed = seed;
  series.noise_amplitude = amplitude;
  series.noise_law = std::string(PortableRng::id()) +
                     (literal_interval ? "/literal-asymmetric" : "/symmetric");

  // Pair each selection row with the row observing the negated mode, so the
  // noise can be conjugate-mirrored exactly.
  std::vector<int> partner(mcount, -1);
  if (model.is_selection()) {
    for (int i = 0; i < mcount; ++i) {
      const int mk = grid.mirror(model.selected[i]);
      const auto it =
          std::lower_bound(model.selected.begin(), model.selected.end(), mk);
      partner[i] = static_cast<int>(it - model.selected.begin());
    }
  }

  const double root_n = std::sqrt(static_cast<double>(grid.size()));
  const double lo = -amplitude / root_n;
  const double hi = literal_interval ? amplitude * root_n : amplitude / root_n;

  PortableRng rng(seed);
  Eigen::VectorXcd eta(mcount);
  for (int t = 0; t < cols; ++t) {
    const Eigen::VectorXcd clean = model.apply(traj.states[t]);
    if (amplitude == 0.0) {
      series.values.col(t) = clean;
      continue;
    }
    if (model.is_selection()) {
      for (int i = 0; i < mcount; ++i) {
        if (partner[i] == i) {
          eta[i] = Cplx(rng.uniform(lo, hi), 0.0);
        } else if (partner[i] > i) {
          eta[i] = Cplx(rng.uniform(lo, hi), rng.uniform(lo, hi));
          eta[partner[i]] = std::conj(eta[i]);
        }
      }
    } else {
      // Dense rows sample the real field directly, so their noise is real.
      for (int i = 0; i < mcount; ++i) eta[i] = Cplx(rng.uniform(lo, hi), 0.0);
    }
    if (model.noise_matrix.size()) {
      series.values.col(t) = clean + model.noise_matrix.cast<Cplx>() * eta;
    } else {
      series.values.col(t) = clean + eta;
    }
  }
  return series;
}

ContainmentReport ellipsoid_contains(const UncertaintyEllipsoid& e,
                                     const Eigen::VectorXcd& omega0,
                                     const std::vector<Eigen::VectorXcd>& model_errors,
                                     const std::vector<Eigen::VectorXcd>& noises) {
  double worst = e.s.quad_inv(omega0);
  for (const auto& f : model_errors) worst = std::max(worst, e.q.quad_inv(f));
  for (const auto& n : noises) worst = std::max(worst, e.r.quad_inv(n));
  ContainmentReport rep;
  rep.margin = 1.0 - worst;
  rep.contained = rep.margin >= 0.0;
  return rep;
}

}  // namespace fgda
