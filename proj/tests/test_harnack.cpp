#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "entropy_lab/harnack.hpp"

using namespace entropy_lab;

namespace {

constexpr double pi = std::numbers::pi;

HeatState gaussian_state(const GridPtr& box, double t) {
  auto u = ScalarField::from_nodes(box, [&](int k) {
    double x = box->euclid_x(k), y = box->euclid_y(k);
    return std::exp(-(x * x + y * y) / (4 * t)) / (4 * pi * t);
  });
  double m = integrate(u);
  for (std::size_t k = 0; k < u.size(); ++k) u[k] /= m;
  return HeatState{u, t};
}

GridPtr sphere(int n) { return build_grid(ManifoldDescriptor::sphere(), {n, 16}); }

}  // namespace

TEST_CASE("Euclidean equality case") {
  auto box = build_grid(ManifoldDescriptor::box(4, 4), {256, 256});
  const auto region = smooth_region(*box, BasePoint::at(0, 0));
  const double h = box->spacing(0);
  for (double t : {0.01, 0.05}) {
    auto s = gaussian_state(box, t);
    auto ly = liyau_defect(s);
    auto sh = sharp_defect(s);
    for (int k = 0; k < box->node_count(); ++k) {
      if (!region[k]) continue;
      CHECK(std::abs(ly[k]) < 1e-8);
      CHECK(std::abs(sh[k]) < h * h / (4 * t));
    }
    auto rows = rigidity_diagnostic({s});
    CHECK(rows[0].hessian_defect < 1e-6);
    CHECK(rows[0].trace_defect < 1e-8);
  }
}

TEST_CASE("sharp defect is pointwise W at tau = t") {
  auto c = build_grid(ManifoldDescriptor::circle(2 * pi), {256});
  auto s = delta_init(c, BasePoint::at(0), 0.1);
  auto a = sharp_defect(s);
  auto b = pointwise_w(s);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(std::abs(a[k] - b[k]) <= 1e-14);
  // tau0 does not enter the sharp defect.
  HeatState shifted = s;
  shifted.tau0 = 0.7;
  auto c2 = sharp_defect(shifted);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(c2[k] == a[k]);
}

TEST_CASE("circle kernel defects") {
  auto c = build_grid(ManifoldDescriptor::circle(2 * pi), {1024});
  CHECK(liyau_defect(delta_init(c, BasePoint::at(0), 0.05)).max() < 1e-3);
  CHECK(sharp_defect(delta_init(c, BasePoint::at(0), 0.1)).max() <= 1e-3);
}

TEST_CASE("sphere kernel defects have a floor") {
  double prev_floor = 0;
  for (int n : {128, 256}) {
    auto s = delta_init(sphere(n), BasePoint::north_pole(), 0.1);
    CHECK(liyau_defect(s).max() <= 1e-3);
    double top = sharp_defect(s).max();
    CHECK(top <= -0.01);
    if (prev_floor != 0) CHECK(top == doctest::Approx(prev_floor).epsilon(0.05));
    prev_floor = top;
    auto rows = rigidity_diagnostic({s});
    CHECK(rows[0].hessian_defect > 1.0);
  }
}

TEST_CASE("torus rigidity grows with wraparound") {
  auto tor = build_grid(ManifoldDescriptor::torus(2 * pi, 2 * pi), {128, 128});
  auto rows = rigidity_diagnostic({delta_init(tor, BasePoint::at(pi, pi), 0.05),
                                   delta_init(tor, BasePoint::at(pi, pi), 1.0)});
  CHECK(rows[0].hessian_defect < 0.05);
  CHECK(rows[1].hessian_defect > rows[0].hessian_defect);
}

TEST_CASE("neither defect dominates the other") {
  // f - t |grad f|^2 = sharp - liyau changes sign between an early kernel on
  // the sphere and a nearly uniform late kernel on the torus.
  auto early = compare_defects(delta_init(sphere(128), BasePoint::north_pole(), 0.05));
  CHECK(early.sharp_below_liyau > 0);
  auto tor = build_grid(ManifoldDescriptor::torus(2 * pi, 2 * pi), {64, 64});
  auto late = compare_defects(delta_init(tor, BasePoint::at(pi, pi), 3.0));
  CHECK(late.liyau_below_sharp > 0);
}

TEST_CASE("Laplacian comparison") {
  auto box = build_grid(ManifoldDescriptor::box(2, 2), {64, 64});
  auto lb = laplacian_comparison(box, BasePoint::at(0, 0));
  auto rb = smooth_region(*box, BasePoint::at(0, 0));
  for (int k = 0; k < box->node_count(); ++k)
    if (rb[k]) CHECK(lb[k] == doctest::Approx(4.0).epsilon(1e-10));

  auto s = sphere(256);
  auto ls = laplacian_comparison(s, BasePoint::north_pole());
  auto rs = smooth_region(*s, BasePoint::north_pole());
  for (int k = 0; k < s->node_count(); ++k) {
    if (!rs[k]) continue;
    double r = s->coord(k, 0);
    CHECK(ls[k] == doctest::Approx(2 + 2 * r / std::tan(r)).epsilon(1e-3));
  }
  CHECK(comparison_excess(s, BasePoint::north_pole()).max_excess <= 1e-3);

  auto c = build_grid(ManifoldDescriptor::circle(2 * pi), {256});
  auto rep = comparison_excess(c, BasePoint::at(0));
  CHECK(rep.max_excess <= 1e-10);
  CHECK(rep.checked_nodes < 256);
}

TEST_CASE("Varadhan profile") {
  auto c = build_grid(ManifoldDescriptor::circle(2 * pi), {1024});
  auto oracle = *KernelOracle::for_grid(*c);
  auto tab = varadhan_profile(oracle, c, BasePoint::at(0), {0.1, 0.05, 0.025, 0.005}, pi / 2);
  REQUIRE(tab.max_error.size() == 4);
  // At r = 0 the error is exactly 4 t log sqrt(4 pi t) up to image terms.
  for (std::size_t i = 0; i < tab.t.size(); ++i) {
    double t = tab.t[i];
    double at_base = tab.scaled_log[i][0];
    CHECK(at_base == doctest::Approx(2 * t * std::log(4 * pi * t)).epsilon(1e-6));
  }
  CHECK(tab.max_error[3] < tab.max_error[0]);
  CHECK_THROWS_AS(varadhan_profile(oracle, c, BasePoint::at(0), {0.01, 0.1}, 1.0), Error);

  auto s = sphere(256);
  auto st = varadhan_profile(*KernelOracle::for_grid(*s), s, BasePoint::north_pole(),
                             {0.1, 0.01, 0.004}, 2.0);
  CHECK(st.max_error[2] < st.max_error[0]);
}
