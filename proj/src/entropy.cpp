#include "entropy_lab/entropy.hpp"

#include <cmath>
#include <numbers>

namespace entropy_lab {

namespace {

constexpr double kPi = std::numbers::pi;

double log_norm(const HeatState& s) {
  require(s.tau() > 0, ErrorCode::InvalidTau, "tau must be positive");
  return 0.5 * s.u.grid()->dimension() * std::log(4.0 * kPi * s.tau());
}

void check_mass(const HeatState& s) {
  const double mass = integrate(s.u);
  require(std::abs(mass - 1.0) <= 1e-8, ErrorCode::ConstraintViolated,
          "state mass " + std::to_string(mass) + " is not 1");
}

double hessian_norm_sq(const HessianField& H, std::size_t k, bool one_d) {
  if (one_d) return H.h11[k] * H.h11[k];
  return H.h11[k] * H.h11[k] + 2.0 * H.h12[k] * H.h12[k] + H.h22[k] * H.h22[k];
}

}  // namespace

ScalarField f_of(const HeatState& state) {
  const double c = log_norm(state);
  ScalarField f(state.u.grid());
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double u = state.u[k];
    require(u > 0 && std::isfinite(u), ErrorCode::LogDomain, "u must be positive and finite");
    f[k] = -std::log(u) - c;
  }
  return f;
}

WParts w_parts(const HeatState& state) {
  check_mass(state);
  const auto& g = *state.u.grid();
  const ScalarField f = f_of(state);
  const auto& vol = g.node_volumes();
  const double tau = state.tau();
  const int n = g.dimension();

  WParts p;
  for (int k = 0; k < g.node_count(); ++k) {
    const double u = state.u[k];
    if (u < kTailFloor) {
      p.excluded_mass += u * vol[k];
      continue;
    }
    p.nash_term += f[k] * u * vol[k];
  }
  double grad = 0.0;
  for (const auto& e : g.edges()) {
    const double d = std::sqrt(state.u[e.b]) - std::sqrt(state.u[e.a]);
    grad += e.weight * d * d;
  }
  p.dirichlet_term = 4.0 * tau * grad;
  p.W = p.dirichlet_term + p.nash_term - n;
  return p;
}

double w_functional(const HeatState& state) { return w_parts(state).W; }

double w_sqrt_form(const HeatState& state) {
  check_mass(state);
  const auto& g = *state.u.grid();
  const auto& vol = g.node_volumes();
  const int n = g.dimension();
  const double tau = state.tau();
  double grad = 0.0;
  for (const auto& e : g.edges()) {
    const double d = std::sqrt(state.u[e.b]) - std::sqrt(state.u[e.a]);
    grad += e.weight * d * d;
  }
  double ent = 0.0;
  for (int k = 0; k < g.node_count(); ++k) {
    const double v2 = state.u[k];
    if (v2 >= kTailFloor) ent += v2 * std::log(v2) * vol[k];
  }
  return 4.0 * tau * grad - ent - n - 0.5 * n * std::log(4.0 * kPi * tau);
}

ScalarField pointwise_w(const HeatState& state) {
  const ScalarField f = f_of(state);
  const ScalarField lap = laplace_beltrami(f);
  const ScalarField gs = gradient_sq(f);
  const double tau = state.tau();
  const int n = f.grid()->dimension();
  ScalarField out(f.grid());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = tau * (2.0 * lap[k] - gs[k]) + f[k] - n;
  return out;
}

double boundary_term(const HeatState& state) {
  const auto& g = *state.u.grid();
  if (g.closed()) return 0.0;
  const ScalarField f = f_of(state);
  double s = 0.0;
  for (const auto& face : g.boundary()) {
    if (face.second_fundamental_form == 0.0) continue;
    // Curved faces only occur on polar grids, where the tangent is e_theta.
    const int k = face.node;
    const double ft = (f[g.neighbor(k, 1, 1)] - f[g.neighbor(k, 1, -1)]) / (2.0 * g.spacing(1));
    const double tangential = ft / g.warp(k);
    s += face.second_fundamental_form * tangential * tangential * face.area;
  }
  return -2.0 * state.tau() * s;
}

EntropyReport snapshot(const HeatState& state) {
  const WParts p = w_parts(state);
  const auto& g = *state.u.grid();
  const ScalarField f = f_of(state);
  const ScalarField hq = hessian_quadratic(f, state.tau());
  const ScalarField rq = ricci_quadratic(f);
  double pred = 0.0;
  const auto& vol = g.node_volumes();
  for (int k = 0; k < g.node_count(); ++k) {
    if (state.u[k] < kTailFloor) continue;
    pred += (hq[k] + rq[k]) * state.u[k] * vol[k];
  }
  EntropyReport r;
  r.t = state.t;
  r.tau = state.tau();
  r.W = p.W;
  r.nash_term = p.nash_term;
  r.dirichlet_term = p.dirichlet_term;
  r.predicted_dWdt = -2.0 * state.tau() * pred;
  r.boundary_term = boundary_term(state);
  r.excluded_mass = p.excluded_mass;
  r.predicted_nonpositive = r.predicted_dWdt <= 0.0;
  return r;
}

std::pair<EntropyReport, HeatState> dissipation(const HeatState& state, const HeatSolver& solver,
                                                double dt) {
  const HeatState a1 = solver.step(state, dt);
  const HeatState a2 = solver.step(a1, dt);
  const HeatState b1 = solver.step(state, 0.5 * dt);
  const HeatState b2 = solver.step(b1, 0.5 * dt);
  const HeatState b3 = solver.step(b2, 0.5 * dt);
  const double d1 = (w_functional(a2) - w_functional(state)) / (2.0 * dt);
  const double d2 = (w_functional(b3) - w_functional(b1)) / dt;
  EntropyReport r = snapshot(b2);
  r.measured_dWdt = (4.0 * d2 - d1) / 3.0;
  const double target = r.predicted_dWdt + r.boundary_term;
  r.match_relerr = std::abs(r.measured_dWdt - target) / std::max(std::abs(target), 1e-300);
  return {r, b2};
}

LemmaResiduals lemma_residuals(const HeatState& s0, const HeatState& s1, const HeatState& s2,
                               double cutoff) {
  const double dt = s1.t - s0.t;
  require(dt > 0 && std::abs((s2.t - s1.t) - dt) <= 1e-9 * dt, ErrorCode::InvalidArgument,
          "states must be equally spaced in time");
  const auto& g = *s1.u.grid();
  const bool one_d = g.dimension() == 1;

  auto small_w = [](const HeatState& s) {
    const ScalarField f = f_of(s);
    return 2.0 * laplace_beltrami(f) - gradient_sq(f);
  };
  const ScalarField w0 = small_w(s0), w1 = small_w(s1), w2 = small_w(s2);
  const ScalarField W0 = pointwise_w(s0), W1 = pointwise_w(s1), W2 = pointwise_w(s2);
  const ScalarField f1 = f_of(s1);
  const HessianField H = hessian(f1);
  const ScalarField hq = hessian_quadratic(f1, s1.tau());
  const ScalarField ric = ricci_quadratic(f1);
  const ScalarField lap_w = laplace_beltrami(w1);
  const ScalarField lap_W = laplace_beltrami(W1);
  const ScalarField dot_w = gradient_dot(w1, f1);
  const ScalarField dot_W = gradient_dot(W1, f1);
  const double tau = s1.tau();
  const double umax = s1.u.max();

  LemmaResiduals r;
  for (int k = 0; k < g.node_count(); ++k) {
    if (s1.u[k] < cutoff * umax) continue;
    const double r1 = (w2[k] - w0[k]) / (2.0 * dt) - lap_w[k] +
                      2.0 * (hessian_norm_sq(H, k, one_d) + ric[k]) + 2.0 * dot_w[k];
    const double r2 = (W2[k] - W0[k]) / (2.0 * dt) - lap_W[k] +
                      2.0 * tau * (hq[k] + ric[k]) + 2.0 * dot_W[k];
    r.w_identity = std::max(r.w_identity, std::abs(r1));
    r.W_identity = std::max(r.W_identity, std::abs(r2));
  }
  return r;
}

}  // namespace entropy_lab
