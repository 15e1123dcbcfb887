#include "entropy_lab/logsob.hpp"

#include <Eigen/SparseLU>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <vector>

#include "entropy_lab/entropy.hpp"

namespace entropy_lab {

namespace {

constexpr double kPi = std::numbers::pi;

double xlogx(double p2) { return p2 > 0.0 ? p2 * std::log(p2) : 0.0; }

double psi_constant(const ManifoldGrid& g, double tau) {
  const int n = g.dimension();
  return 0.5 * n * std::log(4.0 * kPi * tau) + n;
}

double dirichlet_sum(const ManifoldGrid& g, std::span<const double> psi) {
  double s = 0.0;
  for (const auto& e : g.edges()) {
    const double d = psi[e.b] - psi[e.a];
    s += e.weight * d * d;
  }
  return s;
}

void check_unit(const ScalarField& psi) {
  const double m = integrate(psi * psi);
  require(std::abs(m - 1.0) <= 1e-8, ErrorCode::ConstraintViolated,
          "int psi^2 = " + std::to_string(m) + " is not 1");
}

// Discrete problem in node vectors: E = 4 tau psi^T S psi - sum vol psi^2 log psi^2
// - c sum vol psi^2, with S = -K positive semidefinite.
struct Problem {
  const ManifoldGrid& g;
  double tau;
  double c;
  Eigen::SparseMatrix<double> S;
  Eigen::VectorXd vol;

  Problem(const ManifoldGrid& grid, double t)
      : g(grid), tau(t), c(psi_constant(grid, t)), S(-grid.stiffness()) {
    vol = Eigen::Map<const Eigen::VectorXd>(grid.node_volumes().data(), grid.node_count());
  }

  double energy(const Eigen::VectorXd& p) const {
    double ent = 0.0, mass = 0.0;
    for (int k = 0; k < p.size(); ++k) {
      const double p2 = p[k] * p[k];
      ent += vol[k] * xlogx(p2);
      mass += vol[k] * p2;
    }
    return 4.0 * tau * p.dot(S * p) - ent - c * mass;
  }

  // E(q) - E(p) summed from per-node and per-edge differences, so the
  // result keeps relative accuracy when both energies nearly agree.
  double energy_change(const Eigen::VectorXd& p, const Eigen::VectorXd& q) const {
    double grad = 0.0;
    for (const auto& e : g.edges()) {
      const double dp = p[e.b] - p[e.a];
      const double dq = q[e.b] - q[e.a];
      grad += e.weight * (dq - dp) * (dq + dp);
    }
    double ent = 0.0, mass = 0.0;
    for (int k = 0; k < p.size(); ++k) {
      const double a = q[k] * q[k];
      const double b = p[k] * p[k];
      const double diff = (q[k] - p[k]) * (q[k] + p[k]);
      double dx = 0.0;
      if (a > 0.0 && b > 0.0)
        dx = diff * std::log(a) + b * std::log1p(diff / b);
      else
        dx = xlogx(a) - xlogx(b);
      ent += vol[k] * dx;
      mass += vol[k] * diff;
    }
    return 4.0 * tau * grad - ent - c * mass;
  }

  Eigen::VectorXd euclid_gradient(const Eigen::VectorXd& p) const {
    Eigen::VectorXd g = 8.0 * tau * (S * p);
    for (int k = 0; k < p.size(); ++k) {
      const double p2 = p[k] * p[k];
      const double lg = p2 > 0.0 ? std::log(p2) : 0.0;
      g[k] -= vol[k] * (p2 > 0.0 ? 2.0 * p[k] * (lg + 1.0) : 0.0) + 2.0 * c * vol[k] * p[k];
    }
    return g;
  }

  void normalize(Eigen::VectorXd& p) const {
    p = p.cwiseAbs();
    p /= std::sqrt(p.cwiseProduct(p).dot(vol));
  }

  // One Newton step for 8 tau S p - 2 vol p log p^2 - 2 lambda vol p = 0 with
  // the constraint vol . p^2 = 1, bordered through two solves.
  bool newton_step(const Eigen::VectorXd& p, double lambda, Eigen::VectorXd& out) const {
    const int N = static_cast<int>(p.size());
    Eigen::VectorXd G = 8.0 * tau * (S * p);
    Eigen::SparseMatrix<double> H = 8.0 * tau * S;
    for (int k = 0; k < N; ++k) {
      const double p2 = std::max(p[k] * p[k], kTailFloor);
      const double lg = std::log(p2);
      G[k] -= 2.0 * vol[k] * p[k] * (lg + lambda);
      H.coeffRef(k, k) -= 2.0 * vol[k] * (lg + 2.0 + lambda);
    }
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> lu;
    H.makeCompressed();
    lu.compute(H);
    if (lu.info() != Eigen::Success) return false;
    const Eigen::VectorXd vp = vol.cwiseProduct(p);
    const Eigen::VectorXd x = lu.solve(-G);
    const Eigen::VectorXd y = lu.solve(2.0 * vp);
    if (lu.info() != Eigen::Success || !x.allFinite() || !y.allFinite()) return false;
    const double dl = (1.0 - vp.dot(p) - 2.0 * vp.dot(x)) / (2.0 * vp.dot(y));
    out = p + x + dl * y;
    normalize(out);
    return out.allFinite();
  }

  // -4 tau Lap psi - psi log psi^2 - lambda psi with lambda = E + c.
  Eigen::VectorXd residual(const Eigen::VectorXd& p, double E) const {
    Eigen::VectorXd r = 4.0 * tau * (S * p).cwiseQuotient(vol);
    const double lambda = E + c;
    for (int k = 0; k < p.size(); ++k) {
      const double p2 = p[k] * p[k];
      r[k] -= (p2 > 0.0 ? p[k] * std::log(p2) : 0.0) + lambda * p[k];
    }
    return r;
  }
};

}  // namespace

double w_of_psi(const ScalarField& psi, double tau) {
  require(tau > 0, ErrorCode::InvalidTau, "tau must be positive");
  check_unit(psi);
  const auto& g = *psi.grid();
  const auto& vol = g.node_volumes();
  double ent = 0.0;
  for (std::size_t k = 0; k < psi.size(); ++k) ent += vol[k] * xlogx(psi[k] * psi[k]);
  return 4.0 * tau * dirichlet_sum(g, psi.values()) - ent - psi_constant(g, tau);
}

double w_of_psi_rescaled(const ScalarField& psi, double tau) {
  require(tau > 0, ErrorCode::InvalidTau, "tau must be positive");
  check_unit(psi);
  const auto& g = *psi.grid();
  const int n = g.dimension();
  // Lengths scale by (2 tau)^{-1/2}: volumes by (2 tau)^{-n/2}, edge weights
  // |face| / |distance| by (2 tau)^{-(n-2)/2}.
  const double vol_scale = std::pow(2.0 * tau, -0.5 * n);
  const double edge_scale = std::pow(2.0 * tau, -0.5 * (n - 2));
  const double psi_scale = std::pow(2.0 * tau, 0.25 * n);
  const auto& vol = g.node_volumes();
  double grad = 0.0;
  for (const auto& e : g.edges()) {
    const double d = psi_scale * (psi[e.b] - psi[e.a]);
    grad += edge_scale * e.weight * d * d;
  }
  double ent = 0.0, mass = 0.0;
  for (std::size_t k = 0; k < psi.size(); ++k) {
    const double p2 = psi_scale * psi_scale * psi[k] * psi[k];
    ent += vol_scale * vol[k] * xlogx(p2);
    mass += vol_scale * vol[k] * p2;
  }
  return 2.0 * grad - ent - (0.5 * n * std::log(2.0 * kPi) + n) * mass;
}

ScalarField w_gradient(const ScalarField& psi, double tau) {
  require(tau > 0, ErrorCode::InvalidTau, "tau must be positive");
  Problem P(*psi.grid(), tau);
  const Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(psi.vec().data(), psi.size());
  const Eigen::VectorXd g = P.euclid_gradient(p).cwiseQuotient(P.vol);
  return ScalarField(psi.grid(), std::vector<double>(g.data(), g.data() + g.size()));
}

std::pair<double, double> scaling_identity_check(const ScalarField& phi, double lambda,
                                                 double tau) {
  require(lambda > 0, ErrorCode::InvalidArgument, "lambda must be positive");
  require(tau > 0, ErrorCode::InvalidTau, "tau must be positive");
  const auto& g = *phi.grid();
  const auto& vol = g.node_volumes();
  const double c = psi_constant(g, tau);
  auto integrals = [&](double s) {
    double F = 4.0 * tau * s * s * dirichlet_sum(g, phi.values());
    double m = 0.0;
    for (std::size_t k = 0; k < phi.size(); ++k) {
      const double p2 = s * s * phi[k] * phi[k];
      F += vol[k] * (-xlogx(p2) - c * p2);
      m += vol[k] * p2;
    }
    return std::pair{F, m};
  };
  const auto [F1, m1] = integrals(1.0);
  const auto [Fl, ml] = integrals(lambda);
  require(m1 > 0, ErrorCode::InvalidArgument, "phi must not vanish identically");
  return {Fl / ml, F1 / m1 - std::log(lambda * lambda)};
}

BasePoint default_base(const ManifoldGrid& g) {
  const auto& d = g.descriptor();
  switch (g.kind()) {
    case GridKind::Circle: return BasePoint::at(0.5 * d.length1);
    case GridKind::FlatTorus: return BasePoint::at(0.5 * d.length1, 0.5 * d.length2);
    case GridKind::WarpedSurface: return BasePoint::north_pole();
    default: return BasePoint::at(0.0, 0.0);
  }
}

ScalarField gaussian_psi(const GridPtr& grid, const BasePoint& base, double tau) {
  const ScalarField r = distance_field(grid, base);
  ScalarField psi =
      ScalarField::from_nodes(grid, [&](int k) { return std::exp(-r[k] * r[k] / (8.0 * tau)); });
  const double m = std::sqrt(integrate(psi * psi));
  for (std::size_t k = 0; k < psi.size(); ++k) psi[k] /= m;
  return psi;
}

ScalarField constant_psi(const GridPtr& grid) {
  return ScalarField(grid, 1.0 / std::sqrt(grid->total_volume()));
}

MuResult minimize_mu(const GridPtr& grid, double tau, const ScalarField& init,
                     const MuOptions& opts) {
  require(tau > 0, ErrorCode::InvalidTau, "tau must be positive");
  require(init.grid() == grid, ErrorCode::InvalidArgument, "initial field lives on another grid");
  for (std::size_t k = 0; k < init.size(); ++k)
    require(init[k] >= 0 && std::isfinite(init[k]), ErrorCode::InvalidArgument,
            "initial field must be nonnegative");
  const Problem P(*grid, tau);
  Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(init.vec().data(), init.size());
  P.normalize(p);

  // P = sigma V + 8 tau S approximates the second variation.
  const double sigma =
      opts.preconditioner_shift > 0 ? opts.preconditioner_shift : 2.0 + 2.0 * std::abs(P.c);
  Eigen::SparseMatrix<double> A = 8.0 * tau * P.S;
  for (int k = 0; k < grid->node_count(); ++k) A.coeffRef(k, k) += sigma * P.vol[k];
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> pre(A);
  require(pre.info() == Eigen::Success, ErrorCode::InvalidArgument,
          "preconditioner factorization failed");

  MuResult res;
  res.tau = tau;
  double E = P.energy(p);
  res.initial_value = E;
  res.history.push_back(E);
  double step = 1.0;
  Eigen::VectorXd r = P.residual(p, E);
  res.el_residual = r.lpNorm<Eigen::Infinity>();
  // Converged means a small max-norm residual and a multiplier, read at the
  // peak of psi, that matches E + c to the same tolerance.
  auto peak_gap = [&]() {
    Eigen::Index at = 0;
    p.maxCoeff(&at);
    return std::abs(r[at]) / p[at];
  };
  auto done = [&]() { return res.el_residual < opts.tol && peak_gap() < opts.tol; };
  // Descent slows near the minimizer and stalls once energy decreases drop
  // below roundoff, so Newton steps on the Euler-Lagrange system take over
  // whenever the residual is small enough. A rejected Newton attempt lowers
  // the gate so descent makes progress before the next one.
  auto polish = [&]() {
    E = P.energy(p);
    for (int k = 0; k < opts.newton_steps && !done(); ++k) {
      Eigen::VectorXd q;
      if (!P.newton_step(p, E + P.c, q)) return;
      const double Eq = P.energy(q);
      Eigen::VectorXd rq = P.residual(q, Eq);
      const double nq = rq.lpNorm<Eigen::Infinity>();
      if (!(nq <= res.el_residual) || P.energy_change(p, q) > 1e-12 * (1.0 + std::abs(E))) return;
      p = std::move(q);
      E = Eq;
      r = std::move(rq);
      res.el_residual = nq;
      res.history.push_back(E);
      if (opts.trace) std::fprintf(stderr, "newton %d E %.15e res %.3e\n", k, E, nq);
    }
  };
  double gate = opts.newton_start;
  int it = 0;
  for (; it < opts.max_iterations && !done(); ++it) {
    if (opts.newton_steps > 0 && res.el_residual < gate) {
      polish();
      gate = 0.1 * res.el_residual;
      continue;
    }
    const Eigen::VectorXd g = P.euclid_gradient(p);
    const Eigen::VectorXd vp = P.vol.cwiseProduct(p);
    const Eigen::VectorXd pg = pre.solve(g);
    const Eigen::VectorXd pv = pre.solve(vp);
    // Remove the component along psi so the direction is tangent to the constraint.
    const Eigen::VectorXd d = -(pg - (pg.dot(vp) / pv.dot(vp)) * pv);
    const double slope = g.dot(d);
    bool accepted = false;
    double s = std::min(2.0 * step, 4.0);
    for (int b = 0; slope < 0.0 && b < opts.max_backtracks; ++b) {
      Eigen::VectorXd trial = p + s * d;
      P.normalize(trial);
      const double dE = P.energy_change(p, trial);
      if (dE <= opts.armijo_c * s * slope) {
        p = std::move(trial);
        E += dE;
        accepted = true;
        break;
      }
      s *= opts.backtrack;
    }
    if (!accepted) {
      if (opts.newton_steps > 0 && gate > 0.0 && res.el_residual < opts.newton_start) {
        polish();
        gate = 0.0;
        continue;
      }
      break;
    }
    step = s;
    res.history.push_back(E);
    r = P.residual(p, E);
    res.el_residual = r.lpNorm<Eigen::Infinity>();
    if (opts.trace)
      std::fprintf(stderr, "it %d E %.15e res %.3e step %.3e\n", it, E, res.el_residual, s);
  }
  res.iterations = it;
  res.converged = done();
  res.mu = P.energy(p);
  res.psi = ScalarField(grid, std::vector<double>(p.data(), p.data() + p.size()));

  int peak = 0;
  for (int k = 1; k < p.size(); ++k)
    if (p[k] > p[peak]) peak = k;
  const Eigen::VectorXd lap_term = 4.0 * tau * (P.S * p).cwiseQuotient(P.vol);
  res.multiplier = (lap_term[peak] - p[peak] * std::log(p[peak] * p[peak])) / p[peak];
  res.multiplier_gap = std::abs(res.multiplier - (res.mu + P.c));
  return res;
}

MuResult minimize_mu_multistart(const GridPtr& grid, double tau, const ScalarField* warm,
                                const MuOptions& opts) {
  if (!opts.multistart) {
    MuResult r = minimize_mu(grid, tau, gaussian_psi(grid, default_base(*grid), tau), opts);
    r.start = "gaussian";
    return r;
  }
  // Every start gets a short run; the lowest value is then run to convergence.
  MuOptions probe = opts;
  probe.max_iterations = std::min(opts.max_iterations, opts.probe_iterations);
  std::vector<std::pair<ScalarField, const char*>> starts;
  starts.emplace_back(gaussian_psi(grid, default_base(*grid), tau), "gaussian");
  starts.emplace_back(constant_psi(grid), "constant");
  if (warm) starts.emplace_back(*warm, "warm");
  MuResult best;
  bool have = false;
  for (const auto& [init, name] : starts) {
    MuResult r = minimize_mu(grid, tau, init, probe);
    r.start = name;
    if (!have || r.mu < best.mu) {
      best = std::move(r);
      have = true;
    }
  }
  if (best.converged) return best;
  MuOptions rest = opts;
  rest.max_iterations = std::max(0, opts.max_iterations - best.iterations);
  MuResult r = minimize_mu(grid, tau, best.psi, rest);
  r.start = best.start;
  r.iterations += best.iterations;
  r.history.insert(r.history.begin(), best.history.begin(), best.history.end() - 1);
  r.initial_value = best.initial_value;
  return r;
}

namespace {

void check_taus(const std::vector<double>& taus) {
  for (std::size_t i = 0; i < taus.size(); ++i) {
    require(taus[i] > 0, ErrorCode::InvalidTau, "tau must be positive");
    if (i > 0)
      require(taus[i] > taus[i - 1], ErrorCode::InvalidArgument, "tau list must be ascending");
  }
}

void grade(MuCurve& curve) {
  curve.monotone = true;
  curve.nonpositive = true;
  for (std::size_t i = 0; i < curve.entries.size(); ++i) {
    const auto& a = curve.entries[i];
    if (a.mu > 1e-3) curve.nonpositive = false;
    if (!a.converged) continue;
    for (std::size_t j = i + 1; j < curve.entries.size(); ++j) {
      const auto& b = curve.entries[j];
      if (b.converged && a.mu < b.mu - 1e-4) curve.monotone = false;
    }
  }
}

}  // namespace

MuCurve mu_curve(const GridPtr& grid, const std::vector<double>& taus, const MuOptions& opts) {
  check_taus(taus);
  MuCurve curve;
  for (double tau : taus) {
    const ScalarField* warm = curve.entries.empty() ? nullptr : &curve.entries.back().psi;
    curve.entries.push_back(minimize_mu_multistart(grid, tau, warm, opts));
  }
  grade(curve);
  return curve;
}

MuCurve mu_curve_extrapolated(const GridPtr& coarse, const GridPtr& fine,
                              const std::vector<double>& taus, const MuOptions& opts) {
  require(coarse->kind() == fine->kind() && fine->n1() == 2 * coarse->n1() &&
              (fine->dimension() == 1 || fine->n2() == 2 * coarse->n2()),
          ErrorCode::UnsupportedGrid, "fine grid must halve the spacing of the coarse grid");
  MuCurve c = mu_curve(coarse, taus, opts);
  MuCurve curve = mu_curve(fine, taus, opts);
  for (std::size_t i = 0; i < taus.size(); ++i) {
    auto& e = curve.entries[i];
    curve.coarse_mu.push_back(c.entries[i].mu);
    curve.fine_mu.push_back(e.mu);
    e.mu = (4.0 * e.mu - c.entries[i].mu) / 3.0;
    e.converged = e.converged && c.entries[i].converged;
  }
  grade(curve);
  return curve;
}

ScalarField normalize_lsi_sample(const ScalarField& f) {
  const int n = f.grid()->dimension();
  const double norm = std::pow(2.0 * kPi, 0.5 * n);
  const double fmin = f.min();
  double m = 0.0;
  const auto& vol = f.grid()->node_volumes();
  for (std::size_t k = 0; k < f.size(); ++k) m += vol[k] * std::exp(-(f[k] - fmin)) / norm;
  const double shift = std::log(m) - fmin;
  ScalarField out = f;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += shift;
  return out;
}

double euclidean_lsi(const ScalarField& f) {
  const int n = f.grid()->dimension();
  const double norm = std::pow(2.0 * kPi, 0.5 * n);
  ScalarField u = ScalarField::from_nodes(f.grid(), [&](int k) { return std::exp(-f[k]) / norm; });
  for (std::size_t k = 0; k < u.size(); ++k)
    require(u[k] > 0, ErrorCode::ConstraintViolated, "sample density underflows to zero");
  return w_functional(HeatState{std::move(u), 0.5});
}

LsiValue euclidean_lsi_check(const GridPtr& coarse, const GridPtr& fine,
                             const std::function<double(double, double)>& f) {
  require(coarse->kind() == GridKind::EuclideanBox && fine->kind() == GridKind::EuclideanBox,
          ErrorCode::UnsupportedGrid, "log-Sobolev check needs box grids");
  require(fine->n1() == 2 * coarse->n1() && fine->n2() == 2 * coarse->n2(),
          ErrorCode::UnsupportedGrid, "fine grid must halve the spacing of the coarse grid");
  auto eval = [&](const GridPtr& g) {
    return euclidean_lsi(normalize_lsi_sample(
        ScalarField::from_nodes(g, [&](int k) { return f(g->euclid_x(k), g->euclid_y(k)); })));
  };
  LsiValue v;
  v.coarse = eval(coarse);
  v.fine = eval(fine);
  v.extrapolated = (4.0 * v.fine - v.coarse) / 3.0;
  return v;
}

}  // namespace entropy_lab
