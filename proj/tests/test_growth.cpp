#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

#include "entropy_lab/entropy.hpp"
#include "entropy_lab/growth.hpp"

using namespace entropy_lab;

namespace {

constexpr double pi = std::numbers::pi;

GridPtr sphere() { return build_grid(ManifoldDescriptor::sphere(), {256, 64}); }
GridPtr box(int n = 256) { return build_grid(ManifoldDescriptor::box(4, 4), {n, n}); }
GridPtr torus() { return build_grid(ManifoldDescriptor::torus(2 * pi, 2 * pi), {128, 128}); }

double quad(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 10, 1e-13);
}

// Independent smoothstep cutoff and its slope.
double zeta(double s) {
  if (s <= 0.5) return 1.0;
  if (s >= 1.0) return 0.0;
  const double q = 2 * s - 1;
  return (1 - q) * (1 - q) * (1 + 2 * q);
}
double dzeta(double s) {
  if (s <= 0.5 || s >= 1.0) return 0.0;
  const double q = 2 * s - 1;
  return 2 * (-2 * (1 - q) * (1 + 2 * q) + 2 * (1 - q) * (1 - q));
}

}  // namespace

TEST_CASE("cutoff") {
  for (double s : {0.0, 0.3, 0.5, 0.6, 0.75, 0.9, 1.0, 1.5}) {
    CHECK(cutoff(s) == doctest::Approx(zeta(s)).epsilon(1e-14));
    CHECK(cutoff_slope(s) == doctest::Approx(dzeta(s)).epsilon(1e-14));
  }
}

TEST_CASE("ball volumes on the box and the sphere") {
  auto b = box();
  const double h = b->spacing(0);
  auto bp = volume_profile(b, BasePoint::at(0, 0), {0.25, 0.5, 1.0, 1.5});
  for (std::size_t k = 0; k < bp.radii.size(); ++k) {
    const double r = bp.radii[k];
    CHECK(std::abs(bp.volume[k] - pi * r * r) <= 2 * pi * r * h);
    CHECK(bp.area[k] == doctest::Approx(2 * pi * r).epsilon(0.1));
  }

  auto s = sphere();
  auto sp = volume_profile(s, BasePoint::north_pole(), {0.5, 1.0, 2.0, 3.0, pi, 4.0});
  for (std::size_t k = 0; k < 4; ++k) {
    const double r = sp.radii[k];
    CHECK(sp.volume[k] == doctest::Approx(2 * pi * (1 - std::cos(r))).epsilon(1e-3));
    CHECK(sp.area[k] == doctest::Approx(2 * pi * std::sin(r)).epsilon(1e-2));
    CHECK_FALSE(sp.clamped[k]);
  }
  CHECK(sp.clamped[4]);
  CHECK(sp.clamped[5]);
  CHECK(sp.volume[4] == doctest::Approx(4 * pi).epsilon(1e-12));
  CHECK(sp.volume[5] == doctest::Approx(4 * pi).epsilon(1e-12));
}

TEST_CASE("r A / V detects flatness") {
  std::vector<double> radii{0.5, 1.0, 1.5};
  auto err = [&](int n) {
    double e = 0;
    for (double v : volume_profile(box(n), BasePoint::at(0, 0), radii).area_ratio())
      e = std::max(e, std::abs(v - 2));
    return e;
  };
  const double coarse = err(64), fine = err(256);
  CHECK(fine < coarse);
  CHECK(fine < 5e-3);

  auto q = volume_profile(sphere(), BasePoint::north_pole(), radii).area_ratio();
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double r = radii[k];
    CHECK(q[k] < 2);
    CHECK(q[k] == doctest::Approx(r * std::sin(r) / (1 - std::cos(r))).epsilon(1e-2));
  }
}

TEST_CASE("Bishop monotonicity of V / r^n") {
  std::vector<double> radii;
  for (double r = 0.2; r < 3.0; r += 0.2) radii.push_back(r);
  for (auto [g, base] : {std::pair{sphere(), BasePoint::north_pole()},
                         std::pair{torus(), BasePoint::at(0, 0)}}) {
    auto p = volume_profile(g, base, radii);
    for (std::size_t k = 1; k < radii.size(); ++k)
      CHECK(p.volume[k] / (radii[k] * radii[k]) <=
            p.volume[k - 1] / (radii[k - 1] * radii[k - 1]) * (1 + 1e-3));
  }
}

TEST_CASE("kernel entropy on the box stays near zero") {
  auto g = box();
  HeatSolver solver(g);
  std::vector<HeatState> traj{delta_init(g, BasePoint::at(0, 0), 0.01)};
  for (int k = 2; k <= 10; ++k) traj.push_back(solver.advance(traj.back(), 0.01 * k, 0.0025));
  auto rows = kernel_entropy_bound(g, BasePoint::at(0, 0), traj);
  REQUIRE(rows.size() == traj.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    CHECK(r.finite);
    CHECK(std::abs(r.W) < 0.05);
    CHECK(r.W == doctest::Approx(w_sqrt_form(traj[k])).epsilon(1e-12));
    CHECK(std::abs(r.W - w_functional(traj[k])) < 1e-10);
    CHECK(r.dirichlet_bound);
    // Li-Yau is an equality for the Euclidean kernel.
    CHECK(r.dirichlet == doctest::Approx(1.0).epsilon(2e-3));
    CHECK(r.lower_bound <= r.W);
    // int r^2 H = 2 n t.
    CHECK(r.moment == doctest::Approx(4.0 / 3.0).epsilon(1e-3));
    CHECK(r.log_volume == doctest::Approx(std::log(pi * r.t)).epsilon(1e-2));
  }
}

TEST_CASE("kernel entropy on closed surfaces decays like log V - log 4 pi t") {
  auto g = torus();
  auto oracle = KernelOracle::for_grid(*g);
  REQUIRE(oracle);
  std::vector<HeatState> traj;
  for (double t : {0.1, 0.3, 1.0, 3.0, 10.0})
    traj.push_back(HeatState{kernel(*oracle, g, BasePoint::at(0, 0), t), t});
  auto rows = kernel_entropy_bound(g, BasePoint::at(0, 0), traj);
  for (std::size_t k = 1; k < rows.size(); ++k) CHECK(rows[k].W < rows[k - 1].W);
  const double closed = std::log(4 * pi * pi) - std::log(4 * pi * 10.0) - 2;
  CHECK(rows.back().W == doctest::Approx(closed).epsilon(1e-3));
  for (const auto& r : rows) {
    CHECK(r.finite);
    CHECK(r.dirichlet_bound);
    CHECK(r.lower_bound <= r.W);
  }

  auto s = build_grid(ManifoldDescriptor::sphere(), {128, 32});
  auto so = KernelOracle::for_grid(*s);
  REQUIRE(so);
  std::vector<HeatState> st;
  for (double t : {0.5, 2.0, 6.0})
    st.push_back(HeatState{kernel(*so, s, BasePoint::north_pole(), t), t});
  auto srows = kernel_entropy_bound(s, BasePoint::north_pole(), st);
  for (std::size_t k = 1; k < srows.size(); ++k) CHECK(srows[k].W < srows[k - 1].W);
  CHECK(srows.back().W ==
        doctest::Approx(std::log(4 * pi) - std::log(4 * pi * 6.0) - 2).epsilon(1e-3));
}

TEST_CASE("noncollapsing constants") {
  auto c = noncollapse_constants(2);
  CHECK(c.eta == doctest::Approx(1.0 / 9).epsilon(1e-15));
  CHECK(c.C2 == doctest::Approx(-std::log(4 * pi)).epsilon(1e-15));
  CHECK(c.C1 == doctest::Approx(std::log(1.0 / 9) - std::log(4 * pi)).epsilon(1e-15));
  // The slope term peaks at 4 * 3^2 where zeta = 1/2; the entropy term adds
  // at most 1/e.
  CHECK(c.C3 >= 8 * (36 + 0.5 * std::log(2.0)));
  CHECK(c.C3 <= 8 * (36 + std::exp(-1.0)));
}

TEST_CASE("test-function bound on the box") {
  auto g = box();
  const double R = 1.0;
  auto rep = mu_lower_to_volume(g, BasePoint::at(0, 0), 0.1, R);
  // Euclidean values of B and of the right-hand side by radial quadrature.
  const double m = 2 * pi * R * R * quad([](double s) { return zeta(s) * zeta(s) * s; }, 0, 1);
  const double B = std::log(m) - std::log(4 * pi * R * R);
  const double grad = 4 * quad([](double s) { return dzeta(s) * dzeta(s) * s; }, 0.5, 1);
  const double ent = quad(
      [](double s) {
        const double z2 = zeta(s) * zeta(s);
        return z2 > 0 ? z2 * std::log(z2) * s : 0.0;
      },
      0.5, 1);
  const double rhs = B + (grad - ent) * 2 * pi * R * R / m;
  CHECK(rep.B == doctest::Approx(B).epsilon(1e-3));
  CHECK(rep.rhs == doctest::Approx(rhs).epsilon(1e-3));
  CHECK(rep.kappa > 0);
  CHECK(rep.ratio == doctest::Approx(pi).epsilon(1e-3));
  CHECK(rep.noncollapsed);
  CHECK(rep.doubling);
  CHECK(rep.bracket);
  CHECK(rep.chain);
  CHECK(rep.kappa == doctest::Approx(std::exp(-0.1 - rep.C3 - rep.C2)).epsilon(1e-12));
}

TEST_CASE("test-function bound on the sphere") {
  auto g = sphere();
  for (double R : {0.25, 0.5, 1.0}) {
    auto rep = mu_lower_to_volume(g, BasePoint::north_pole(), 0.1, R);
    CHECK(rep.kappa > 0);
    CHECK(rep.noncollapsed);
    CHECK(rep.doubling);
    CHECK(rep.bracket);
    CHECK(rep.chain);
    CHECK(rep.ratio == doctest::Approx(2 * pi * (1 - std::cos(R)) / (R * R)).epsilon(2e-3));
  }
}

TEST_CASE("doubling iteration") {
  const double eta = 1.0 / 9;
  auto b = doubling_iteration(volume_profile(box(), BasePoint::at(0, 0), dyadic_radii(1, 4)), eta);
  CHECK(b.broken_at == 1);
  CHECK_FALSE(b.persists);
  CHECK_FALSE(b.anomalous);
  CHECK(b.exponent == doctest::Approx(2).epsilon(1e-3));

  auto s = doubling_iteration(
      volume_profile(sphere(), BasePoint::north_pole(), dyadic_radii(0.5, 4)), eta);
  CHECK(s.broken_at == 1);
  CHECK_FALSE(s.anomalous);

  auto p = doubling_iteration(power_profile(2, 3.5, dyadic_radii(1, 8)), eta);
  CHECK(p.persists);
  CHECK(p.anomalous);
  CHECK(p.chain_length == 8);
  CHECK(p.exponent == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(p.exponent_bound == doctest::Approx(2 * std::log2(3.0)).epsilon(1e-12));
  CHECK(p.exponent > p.exponent_bound);

  auto e = doubling_iteration(power_profile(2, 2.0, dyadic_radii(1, 8)), eta);
  CHECK(e.broken_at == 1);

  CHECK_THROWS_AS(doubling_iteration(power_profile(2, 3.5, {1.0, 0.4}), eta), Error);
  CHECK_THROWS_AS(doubling_iteration(power_profile(2, 3.5, dyadic_radii(1, 2)), 1.5), Error);
}

TEST_CASE("diameter bound") {
  CHECK(diameter_bound(4 * pi, 1.0) == 26.0);
  CHECK(diameter_bound(1.0, 2.0) == 2.0);
  CHECK_THROWS_AS(diameter_bound(1.0, 0.0), Error);
  CHECK_THROWS_AS(diameter_bound(0.0, 1.0), Error);

  auto s = sphere();
  auto rs = mu_lower_to_volume(s, BasePoint::north_pole(), 0.1, 1.0);
  CHECK(diameter_bound(s->total_volume(), rs.kappa) >= pi);

  auto t = torus();
  auto rt = mu_lower_to_volume(t, BasePoint::at(0, 0), 0.1, 1.0);
  const auto d = distance_field(t, BasePoint::at(0, 0));
  const double diam = *std::max_element(d.values().begin(), d.values().end());
  CHECK(diam == doctest::Approx(std::sqrt(2.0) * pi).epsilon(2e-2));
  CHECK(diameter_bound(t->total_volume(), rt.kappa) >= std::sqrt(2.0) * pi);
}

TEST_CASE("growth input errors") {
  auto g = box(32);
  CHECK_THROWS_AS(volume_profile(g, BasePoint::at(0, 0), {-1.0}), Error);
  CHECK_THROWS_AS(mu_lower_to_volume(g, BasePoint::at(0, 0), 0.1, 0.0), Error);
  CHECK_THROWS_AS(dyadic_radii(1.0, -1), Error);
  CHECK_THROWS_AS(power_profile(2, -1.0, {1.0}), Error);
}
