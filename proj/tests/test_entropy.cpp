#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "entropy_lab/entropy.hpp"

using namespace entropy_lab;

namespace {

constexpr double pi = std::numbers::pi;

// Euclidean heat kernel sampled on the box, renormalized to unit grid mass.
HeatState gaussian_state(const GridPtr& box, double t) {
  auto u = ScalarField::from_nodes(box, [&](int k) {
    double x = box->euclid_x(k), y = box->euclid_y(k);
    return std::exp(-(x * x + y * y) / (4 * t)) / (4 * pi * t);
  });
  double m = integrate(u);
  for (std::size_t k = 0; k < u.size(); ++k) u[k] /= m;
  return HeatState{u, t};
}

bool interior(const ManifoldGrid& g, int k, int band) {
  int i = g.i_of(k), j = g.j_of(k);
  return i >= band && j >= band && i < g.n1() - band && j < g.n2() - band;
}

}  // namespace

TEST_CASE("f_of") {
  auto tor = build_grid(ManifoldDescriptor::torus(2 * pi, 2 * pi), {32, 32});
  HeatState uni{ScalarField(tor, 1.0 / (4 * pi * pi)), 1.0 / (4 * pi)};
  auto f = f_of(uni);
  for (std::size_t k = 0; k < f.size(); ++k) CHECK(f[k] == doctest::Approx(std::log(4 * pi * pi)));

  auto box = build_grid(ManifoldDescriptor::box(4, 4), {64, 64});
  auto s = gaussian_state(box, 0.05);
  auto fb = f_of(s);
  double shift = fb[0] - (std::pow(box->euclid_x(0), 2) + std::pow(box->euclid_y(0), 2)) / 0.2;
  for (int k = 0; k < box->node_count(); ++k) {
    double r2 = std::pow(box->euclid_x(k), 2) + std::pow(box->euclid_y(k), 2);
    CHECK(fb[k] == doctest::Approx(r2 / 0.2 + shift).epsilon(1e-12));
    // Round trip u = e^{-f} / (4 pi tau)^{n/2}.
    CHECK(std::exp(-fb[k]) / (4 * pi * 0.05) == doctest::Approx(s.u[k]).epsilon(1e-13));
  }
  CHECK(std::abs(shift) < 1e-8);

  HeatState bad{ScalarField(tor, 0.0), 1.0};
  try {
    f_of(bad);
    FAIL("expected LogDomain");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LogDomain);
  }
}

TEST_CASE("W of the Euclidean kernel vanishes") {
  auto box = build_grid(ManifoldDescriptor::box(4, 4), {256, 256});
  const double h = box->spacing(0);
  for (double t : {0.01, 0.03, 0.05}) {
    auto s = gaussian_state(box, t);
    auto p = w_parts(s);
    CHECK(std::abs(p.W) < h * h / t);
    CHECK(p.W == doctest::Approx(p.dirichlet_term + p.nash_term - 2).epsilon(1e-14));
    // Gaussian moments: tau int |grad f|^2 u = int f u = n/2.
    CHECK(p.dirichlet_term == doctest::Approx(1.0).epsilon(5e-3));
    auto pw = pointwise_w(s);
    for (int k = 0; k < box->node_count(); ++k)
      if (interior(*box, k, 4)) CHECK(std::abs(pw[k]) < h * h / (4 * t));
    // Only the Neumann rim, where u is below 1e-8, departs from the equality case.
    CHECK(std::abs(snapshot(s).predicted_dWdt) < 1e-4);
  }
}

TEST_CASE("W of a uniform density") {
  auto s = build_grid(ManifoldDescriptor::sphere(), {128, 16});
  const double V = s->total_volume();
  for (double tau : {0.1, 1.0, 3.0}) {
    HeatState st{ScalarField(s, 1.0 / V), tau};
    CHECK(w_functional(st) ==
          doctest::Approx(std::log(V) - std::log(4 * pi * tau) - 2).epsilon(1e-12));
  }
}

TEST_CASE("mass constraint") {
  auto c = build_grid(ManifoldDescriptor::circle(1.0), {32});
  HeatState st{ScalarField(c, 2.0), 1.0};
  try {
    w_functional(st);
    FAIL("expected ConstraintViolated");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConstraintViolated);
  }
}

TEST_CASE("sqrt form and pointwise integral") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.2, 2.0);
  for (auto g : {build_grid(ManifoldDescriptor::sphere(), {64, 16}),
                 build_grid(ManifoldDescriptor::torus(2 * pi, 4), {32, 24}),
                 build_grid(ManifoldDescriptor::circle(3.0), {64})}) {
    for (int rep = 0; rep < 5; ++rep) {
      auto u = ScalarField::from_nodes(g, [&](int) { return U(rng); });
      double m = integrate(u);
      for (std::size_t k = 0; k < u.size(); ++k) u[k] /= m;
      HeatState st{u, U(rng)};
      CHECK(w_sqrt_form(st) == doctest::Approx(w_functional(st)).epsilon(1e-12));
    }
  }
  // The pointwise density integrates to W up to the second-order mismatch
  // between node and edge gradients.
  double prev = 0;
  for (int n : {64, 128, 256}) {
    auto s = build_grid(ManifoldDescriptor::sphere(), {n, 16});
    auto st = delta_init(s, BasePoint::north_pole(), 0.2);
    double gap = std::abs(integrate(pointwise_w(st) * st.u) - w_functional(st));
    if (prev > 0) CHECK(prev / gap > 3.5);
    prev = gap;
  }
  CHECK(prev < 1e-4);
}

TEST_CASE("pointwise W sign for the circle kernel") {
  auto c = build_grid(ManifoldDescriptor::circle(2 * pi), {1024});
  for (double t : {0.05, 0.1, 0.2}) {
    auto pw = pointwise_w(delta_init(c, BasePoint::at(0), t));
    CHECK(pw.max() <= 1e-3);
  }
}

TEST_CASE("monotone W along trajectories") {
  auto check = [](const GridPtr& g, const BasePoint& base, double t0, double dt, int steps) {
    HeatSolver solver(g);
    auto st = delta_init(g, base, t0);
    double w = w_functional(st);
    for (int i = 0; i < steps; ++i) {
      st = solver.step(st, dt);
      double w1 = w_functional(st);
      CHECK(w1 <= w + 1e-8);
      CHECK(snapshot(st).predicted_dWdt <= 0);
      w = w1;
    }
  };
  check(build_grid(ManifoldDescriptor::sphere(), {96, 16}), BasePoint::north_pole(), 0.05, 0.01, 40);
  // Flat grids start once wraparound or the rim makes the dissipation visible
  // above the O(h^2 / t^2) drift of the discrete Gaussian.
  check(build_grid(ManifoldDescriptor::circle(2 * pi), {256}), BasePoint::at(0), 0.3, 0.02, 40);
  check(build_grid(ManifoldDescriptor::disc(1.0), {48, 32}), BasePoint::at(0, 0), 0.05, 0.01, 40);
}

TEST_CASE("dissipation matches the measured slope") {
  double prev = 0;
  for (int n : {128, 256}) {
    auto s = build_grid(ManifoldDescriptor::sphere(), {n, 16});
    HeatSolver solver(s);
    auto [rep, st] = dissipation(delta_init(s, BasePoint::north_pole(), 0.2), solver, 2.56 / n);
    CHECK(rep.predicted_dWdt < 0);
    CHECK(rep.match_relerr < 0.05);
    CHECK(rep.boundary_term == 0.0);
    CHECK(st.t == doctest::Approx(rep.t));
    if (prev > 0) CHECK(prev / rep.match_relerr > 1.7);
    prev = rep.match_relerr;
  }
}

TEST_CASE("torus dissipation is purely Hessian") {
  auto g = build_grid(ManifoldDescriptor::torus(2 * pi, 2 * pi), {64, 64});
  auto st = delta_init(g, BasePoint::at(1, 1), 0.3);
  auto ric = ricci_quadratic(f_of(st));
  CHECK(ric.max() == 0.0);
  CHECK(ric.min() == 0.0);
}

TEST_CASE("boundary terms") {
  auto box = build_grid(ManifoldDescriptor::box(2, 2), {32, 32});
  auto sb = delta_init(box, BasePoint::at(0.3, -0.2), 0.05);
  CHECK(boundary_term(sb) == 0.0);

  auto disc = build_grid(ManifoldDescriptor::disc(1.0), {32, 32});
  auto radial = delta_init(disc, BasePoint::at(0, 0), 0.05);
  CHECK(std::abs(boundary_term(radial)) < 1e-14);

  // Angular mode: direct quadrature of -2 tau (f_theta / R)^2 on the rim.
  auto u = ScalarField::from_nodes(disc, [&](int k) {
    double r = disc->coord(k, 0), th = disc->coord(k, 1);
    return 1.0 + 0.3 * r * r * std::cos(th);
  });
  double m = integrate(u);
  for (std::size_t k = 0; k < u.size(); ++k) u[k] /= m;
  HeatState st{u, 0.4};
  double b = boundary_term(st);
  CHECK(b < 0);
  const double R = 1.0;
  const double r_rim = disc->coord(disc->index(disc->n1() - 1, 0), 0);
  double quad = 0;
  const double dth = 2 * pi / disc->n2();
  for (int j = 0; j < disc->n2(); ++j) {
    double th = j * dth;
    double uu = (1.0 + 0.3 * r_rim * r_rim * std::cos(th));
    double dfdth = 0.3 * r_rim * r_rim * std::sin(th) / uu;  // -d/dtheta log u
    quad += std::pow(dfdth / r_rim, 2) * R * dth;
  }
  CHECK(b == doctest::Approx(-2 * 0.4 * quad).epsilon(2e-2));
}

TEST_CASE("lemma residuals converge") {
  double prev1 = 0, prev2 = 0;
  for (int n : {256, 512, 1024}) {
    auto c = build_grid(ManifoldDescriptor::circle(2 * pi), {n});
    HeatSolver solver(c);
    const double dt = 5.12 / n;
    auto s0 = delta_init(c, BasePoint::at(0), 0.5);
    auto s1 = solver.step(s0, dt);
    auto s2 = solver.step(s1, dt);
    auto r = lemma_residuals(s0, s1, s2);
    if (prev1 > 0) {
      CHECK(std::log2(prev1 / r.w_identity) >= 1.0);
      CHECK(std::log2(prev2 / r.W_identity) >= 1.0);
    }
    prev1 = r.w_identity;
    prev2 = r.W_identity;
  }
}
