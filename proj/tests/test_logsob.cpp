#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "entropy_lab/entropy.hpp"
#include "entropy_lab/logsob.hpp"

using namespace entropy_lab;

namespace {

constexpr double pi = std::numbers::pi;

GridPtr torus(int n) { return build_grid(ManifoldDescriptor::torus(2 * pi, 2 * pi), {n, n}); }
GridPtr sphere(int nr, int nt) { return build_grid(ManifoldDescriptor::sphere(), {nr, nt}); }

ScalarField normalized(ScalarField psi) {
  const double m = std::sqrt(integrate(psi * psi));
  for (std::size_t k = 0; k < psi.size(); ++k) psi[k] /= m;
  return psi;
}

// Smooth positive field built from a few random modes.
ScalarField random_psi(const GridPtr& g, std::mt19937& rng) {
  std::uniform_real_distribution<double> a(-0.4, 0.4);
  const double c1 = a(rng), c2 = a(rng), c3 = a(rng);
  return normalized(ScalarField::from_nodes(g, [&](int k) {
    const double x = g->coord(k, 0), y = g->dimension() > 1 ? g->coord(k, 1) : 0.0;
    return 1.0 + c1 * std::cos(x) + c2 * std::sin(2 * y) + c3 * std::cos(x + y);
  }));
}

// Unconstrained functional, independent of the solver internals.
double w_free(const ScalarField& psi, double tau) {
  const auto& g = *psi.grid();
  const int n = g.dimension();
  const double c = 0.5 * n * std::log(4 * pi * tau) + n;
  double v = 4 * tau * dirichlet_form(psi, psi);
  const auto& vol = g.node_volumes();
  for (std::size_t k = 0; k < psi.size(); ++k) {
    const double p2 = psi[k] * psi[k];
    v -= vol[k] * ((p2 > 0 ? p2 * std::log(p2) : 0.0) + c * p2);
  }
  return v;
}

double gaussian_lsi(int n, double s) { return 0.5 * n * (1 / s - 1 + std::log(s)); }

}  // namespace

TEST_CASE("w_of_psi closed forms") {
  auto box = build_grid(ManifoldDescriptor::box(16, 16), {256, 256});
  CHECK(std::abs(w_of_psi(gaussian_psi(box, BasePoint::at(0, 0), 0.5), 0.5)) < 5e-3);

  auto s = sphere(64, 16);
  const double V = s->total_volume();
  for (double tau : {0.1, 1.0, 10.0})
    CHECK(w_of_psi(constant_psi(s), tau) ==
          doctest::Approx(std::log(V) - std::log(4 * pi * tau) - 2).epsilon(1e-12));
}

TEST_CASE("w_of_psi matches w_functional with u = psi^2") {
  std::mt19937 rng(7);
  for (auto g : {torus(32), sphere(64, 16)}) {
    for (double tau : {0.05, 0.5, 3.0}) {
      auto psi = random_psi(g, rng);
      HeatState s{psi * psi, tau};
      CHECK(w_of_psi(psi, tau) == doctest::Approx(w_functional(s)).epsilon(1e-12));
    }
  }
}

TEST_CASE("rescaled form agrees") {
  std::mt19937 rng(11);
  for (auto g : {torus(32), sphere(64, 16), build_grid(ManifoldDescriptor::circle(2 * pi), {64})}) {
    for (double tau : {0.01, 0.3, 7.0}) {
      auto psi = random_psi(g, rng);
      CHECK(std::abs(w_of_psi_rescaled(psi, tau) - w_of_psi(psi, tau)) < 1e-10);
    }
  }
}

TEST_CASE("scaling identity") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> lam(0.05, 20.0), tau(0.01, 10.0);
  auto g = torus(24);
  for (int i = 0; i < 100; ++i) {
    auto phi = random_psi(g, rng);
    auto [lhs, rhs] = scaling_identity_check(phi, lam(rng), tau(rng));
    CHECK(std::abs(lhs - rhs) < 1e-10);
  }
  auto phi = random_psi(g, rng);
  auto [a, b] = scaling_identity_check(phi, 1.0, 0.5);
  CHECK(a == b);
  CHECK_THROWS_AS(scaling_identity_check(phi, 0.0, 0.5), Error);
}

TEST_CASE("gradient matches finite differences") {
  std::mt19937 rng(5);
  std::normal_distribution<double> z;
  auto g = sphere(64, 16);
  const double tau = 0.3;
  auto psi = random_psi(g, rng);
  auto grad = w_gradient(psi, tau);
  const auto& vol = g->node_volumes();
  const double eps = 1e-4;
  for (int i = 0; i < 20; ++i) {
    ScalarField d = ScalarField::from_nodes(g, [&](int) { return z(rng); });
    double analytic = 0;
    for (std::size_t k = 0; k < d.size(); ++k) analytic += vol[k] * grad[k] * d[k];
    const double fd = (w_free(psi + eps * d, tau) - w_free(psi - eps * d, tau)) / (2 * eps);
    CHECK(std::abs(fd - analytic) <= 1e-5 * std::abs(analytic));
  }
}

TEST_CASE("minimizer on a large box is the Gaussian") {
  auto box = build_grid(ManifoldDescriptor::box(16, 16), {256, 256});
  auto start = gaussian_psi(box, BasePoint::at(0, 0), 0.5);
  auto res = minimize_mu(box, 0.5, start);
  CHECK(res.converged);
  CHECK(std::abs(res.mu) < 5e-3);
  CHECK(res.mu <= res.initial_value);
  auto diff = res.psi - start;
  CHECK(std::sqrt(integrate(diff * diff)) < 0.02);
  CHECK(std::abs(integrate(res.psi * res.psi) - 1) < 1e-10);
  CHECK(res.multiplier_gap < 1e-6);
  CHECK(res.el_residual < 1e-6);
}

TEST_CASE("descent and constraint along iterates") {
  auto g = sphere(128, 32);
  std::mt19937 rng(2);
  auto res = minimize_mu(g, 0.05, random_psi(g, rng));
  REQUIRE(res.history.size() >= 2);
  for (std::size_t i = 1; i < res.history.size(); ++i)
    CHECK(res.history[i] <= res.history[i - 1] + 1e-12 * (1 + std::abs(res.history[i - 1])));
  CHECK(res.mu <= res.initial_value);
  CHECK(std::abs(integrate(res.psi * res.psi) - 1) < 1e-10);
  for (std::size_t k = 0; k < res.psi.size(); ++k) CHECK(res.psi[k] >= 0);
}

TEST_CASE("sphere at large tau is below the constant bound") {
  auto g = sphere(128, 32);
  auto res = minimize_mu_multistart(g, 10.0, nullptr);
  CHECK(res.converged);
  CHECK(res.mu <= std::log(4 * pi) - std::log(40 * pi) - 2 + 1e-6);
}

TEST_CASE("mu curves") {
  std::vector<double> taus{0.05, 0.15, 0.5, 1.5, 5.0};
  auto sc = mu_curve(sphere(128, 32), taus);
  CHECK(sc.monotone);
  CHECK(sc.nonpositive);
  for (const auto& e : sc.entries) CHECK(e.converged);

  auto tc = mu_curve_extrapolated(torus(64), torus(128), taus);
  CHECK(tc.monotone);
  CHECK(tc.nonpositive);
  REQUIRE(tc.fine_mu.size() == taus.size());
  // The raw fine values carry the O(h^2 / tau) bias that extrapolation removes.
  CHECK(std::abs(tc.entries[0].mu) < std::abs(tc.fine_mu[0]));
  CHECK_THROWS_AS(mu_curve_extrapolated(torus(64), torus(96), taus), Error);
  CHECK_THROWS_AS(mu_curve(torus(16), {0.5, 0.1}), Error);
}

TEST_CASE("solver input errors") {
  auto g = torus(16);
  CHECK_THROWS_AS(minimize_mu(g, 0.0, constant_psi(g)), Error);
  auto bad = constant_psi(g);
  bad[3] = -1;
  CHECK_THROWS_AS(minimize_mu(g, 0.5, bad), Error);
  auto off = 2.0 * constant_psi(g);
  CHECK_THROWS_AS(w_of_psi(off, 0.5), Error);
}

TEST_CASE("Euclidean log-Sobolev samples") {
  auto coarse = build_grid(ManifoldDescriptor::box(16, 16), {256, 256});
  auto fine = build_grid(ManifoldDescriptor::box(16, 16), {512, 512});
  auto gauss = [](double s) {
    return [s](double x, double y) { return (x * x + y * y) / (2 * s); };
  };
  // The standard Gaussian written with the extra (n/2) log 2 pi shift is
  // normalized back to unit mass.
  auto std_gauss = euclidean_lsi_check(coarse, fine, [](double x, double y) {
    return (x * x + y * y) / 2 + std::log(2 * pi);
  });
  CHECK(std::abs(std_gauss.fine) < 5e-3);
  CHECK(std::abs(std_gauss.extrapolated) < 1e-6);
  CHECK(std::abs(std_gauss.fine) < std::abs(std_gauss.coarse));

  CHECK(gaussian_lsi(2, 2.0) == doctest::Approx(0.193).epsilon(2e-3));
  CHECK(gaussian_lsi(2, 0.5) == doctest::Approx(0.307).epsilon(2e-3));
  for (double s : {2.0, 0.5, 1.5})
    CHECK(euclidean_lsi_check(coarse, fine, gauss(s)).extrapolated ==
          doctest::Approx(gaussian_lsi(2, s)).epsilon(1e-4));

  std::mt19937 rng(9);
  std::uniform_real_distribution<double> a(-0.5, 0.5), c(-2.0, 2.0);
  for (int i = 0; i < 5; ++i) {
    const double amp = a(rng), cx = c(rng), cy = c(rng);
    auto v = euclidean_lsi_check(coarse, fine, [&](double x, double y) {
      const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      return (x * x + y * y) / 2 + amp * std::exp(-r2);
    });
    CHECK(v.extrapolated >= -1e-6);
  }
  CHECK_THROWS_AS(euclidean_lsi_check(coarse, coarse, gauss(1.0)), Error);
}
