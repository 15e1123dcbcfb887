#include "entropy_lab/rearrange.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace entropy_lab {

namespace {

constexpr double kPi = std::numbers::pi;

double xlogx(double p2) { return p2 > 0.0 ? p2 * std::log(p2) : 0.0; }

double unit_ball(int n) { return std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n + 1.0); }

double radius_of_volume(int n, double v) { return std::pow(v / unit_ball(n), 1.0 / n); }

void require_box(const ManifoldGrid& g) {
  require(g.kind() == GridKind::EuclideanBox, ErrorCode::UnsupportedGrid,
          "symmetrization needs a Euclidean box grid");
}

void check_field(const ScalarField& phi) {
  require_box(*phi.grid());
  for (std::size_t k = 0; k < phi.size(); ++k)
    require(phi[k] >= 0.0 && std::isfinite(phi[k]), ErrorCode::DomainError,
            "field must be nonnegative");
  for (const auto& f : phi.grid()->boundary())
    require(phi[f.node] == 0.0, ErrorCode::DomainError, "field must vanish on the boundary");
}

}  // namespace

Interpolant::Interpolant(const ScalarField& phi) {
  const auto& g = *phi.grid();
  require_box(g);
  auto push = [&](int p0, int p1, int p2) {
    const double f0 = phi[p0], f1 = phi[p1], f2 = phi[p2];
    if (f0 == 0.0 && f1 == 0.0 && f2 == 0.0) return;
    const double x1 = g.euclid_x(p1) - g.euclid_x(p0), y1 = g.euclid_y(p1) - g.euclid_y(p0);
    const double x2 = g.euclid_x(p2) - g.euclid_x(p0), y2 = g.euclid_y(p2) - g.euclid_y(p0);
    const double det = x1 * y2 - x2 * y1;
    const double gx = ((f1 - f0) * y2 - (f2 - f0) * y1) / det;
    const double gy = (x1 * (f2 - f0) - x2 * (f1 - f0)) / det;
    double v[3] = {f0, f1, f2};
    std::sort(v, v + 3);
    Tri t{v[0], v[1], v[2], 0.5 * std::abs(det), std::hypot(gx, gy)};
    grad_max_ = std::max(grad_max_, t.grad);
    max_ = std::max(max_, t.c);
    tris_.push_back(t);
  };
  for (int i = 0; i + 1 < g.n1(); ++i)
    for (int j = 0; j + 1 < g.n2(); ++j) {
      const int p00 = g.index(i, j), p10 = g.index(i + 1, j);
      const int p11 = g.index(i + 1, j + 1), p01 = g.index(i, j + 1);
      push(p00, p10, p11);
      push(p00, p11, p01);
    }
}

double Interpolant::volume_at_least(double t) const {
  double v = 0.0;
  for (const auto& r : tris_) {
    if (t <= r.a) {
      v += r.area;
    } else if (t <= r.b) {
      v += r.area * (1.0 - (t - r.a) * (t - r.a) / ((r.c - r.a) * (r.b - r.a)));
    } else if (t <= r.c) {
      v += r.area * (r.c - t) * (r.c - t) / ((r.c - r.a) * (r.c - r.b));
    }
  }
  return v;
}

double Interpolant::volume_above(double t) const {
  double v = 0.0;
  for (const auto& r : tris_) {
    if (t < r.a) {
      v += r.area;
    } else if (t < r.b) {
      v += r.area * (1.0 - (t - r.a) * (t - r.a) / ((r.c - r.a) * (r.b - r.a)));
    } else if (t < r.c) {
      v += r.area * (r.c - t) * (r.c - t) / ((r.c - r.a) * (r.c - r.b));
    }
  }
  return v;
}

double Interpolant::integrate(const std::function<double(double)>& lambda) const {
  using Quad = boost::math::quadrature::gauss<double, 3>;
  double total = 0.0;
  for (const auto& r : tris_) {
    if (r.a == r.c) {
      total += r.area * lambda(r.a);
      continue;
    }
    // dArea/ds is a hat on [a, c] with its peak at b.
    if (r.b > r.a) {
      const double k = 2.0 * r.area / ((r.c - r.a) * (r.b - r.a));
      total += Quad::integrate([&](double s) { return lambda(s) * k * (s - r.a); }, r.a, r.b);
    }
    if (r.c > r.b) {
      const double k = 2.0 * r.area / ((r.c - r.a) * (r.c - r.b));
      total += Quad::integrate([&](double s) { return lambda(s) * k * (r.c - s); }, r.b, r.c);
    }
  }
  return total;
}

double Interpolant::dirichlet() const {
  double e = 0.0;
  for (const auto& r : tris_) e += r.grad * r.grad * r.area;
  return e;
}

Interpolant::Level Interpolant::level(double t) const {
  Level lv;
  lv.min_gradient = std::numeric_limits<double>::infinity();
  for (const auto& r : tris_) {
    if (!(t > r.a && t < r.c)) continue;
    const double dA = t < r.b ? 2.0 * r.area * (t - r.a) / ((r.c - r.a) * (r.b - r.a))
                              : 2.0 * r.area * (r.c - t) / ((r.c - r.a) * (r.c - r.b));
    lv.inv_grad_int += dA;
    lv.length += r.grad * dA;
    lv.grad_int += r.grad * r.grad * dA;
    lv.min_gradient = std::min(lv.min_gradient, r.grad);
    ++lv.triangles;
  }
  return lv;
}

double ball_volume(int n, double r) { return unit_ball(n) * std::pow(r, n); }

double sphere_area(int n, double r) { return n * unit_ball(n) * std::pow(r, n - 1); }

LevelProfile distribution(const ScalarField& phi, int K) {
  require(K >= 2, ErrorCode::InvalidArgument, "need at least two thresholds");
  check_field(phi);
  const auto& g = *phi.grid();
  std::vector<int> order;
  for (int k = 0; k < g.node_count(); ++k)
    if (phi[k] > 0.0) order.push_back(k);
  require(!order.empty(), ErrorCode::DomainError, "field vanishes identically");
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return phi[a] > phi[b]; });

  LevelProfile p;
  p.grid = phi.grid();
  auto interp = std::make_shared<Interpolant>(phi);
  const auto& vol = g.node_volumes();
  double total = 0.0;
  for (int k : order) total += vol[k];
  std::size_t j = 0;
  double acc = vol[order[0]];
  for (int k = 0; k < K; ++k) {
    const double target = total * k / K;
    while (j + 1 < order.size() && acc <= target) acc += vol[order[++j]];
    const double t = phi[order[j]];
    p.thresholds.push_back(t);
    p.F.push_back(interp->volume_at_least(t));
  }
  p.support_volume = interp->volume_above(0.0);
  p.max_value = interp->max_value();
  p.interpolant = std::move(interp);
  return p;
}

double RadialFunction::operator()(double r) const {
  if (r >= R) return 0.0;
  const auto it = std::upper_bound(rho.begin(), rho.end(), r);
  const auto i = static_cast<std::size_t>(it - rho.begin());
  if (i == 0) return value.front();
  const double a = rho[i - 1], b = rho[i];
  return value[i - 1] + (value[i] - value[i - 1]) * (r - a) / (b - a);
}

double RadialFunction::volume_at_least(double t) const {
  if (t <= 0.0) return ball_volume(dimension, R);
  if (t > value.front()) return 0.0;
  for (std::size_t i = 0; i + 1 < rho.size(); ++i) {
    if (value[i + 1] >= t) continue;
    const double frac = (value[i] - t) / (value[i] - value[i + 1]);
    return ball_volume(dimension, rho[i] + frac * (rho[i + 1] - rho[i]));
  }
  return ball_volume(dimension, R);
}

double RadialFunction::integrate(const std::function<double(double)>& lambda) const {
  using Quad = boost::math::quadrature::gauss<double, 7>;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < rho.size(); ++i) {
    const double a = rho[i], b = rho[i + 1];
    const double va = value[i], vb = value[i + 1];
    total += Quad::integrate(
        [&](double r) {
          return lambda(va + (vb - va) * (r - a) / (b - a)) * sphere_area(dimension, r);
        },
        a, b);
  }
  return total;
}

double RadialFunction::dirichlet() const {
  double e = 0.0;
  for (std::size_t i = 0; i + 1 < rho.size(); ++i) {
    const double s = (value[i] - value[i + 1]) / (rho[i + 1] - rho[i]);
    e += s * s * (ball_volume(dimension, rho[i + 1]) - ball_volume(dimension, rho[i]));
  }
  return e;
}

RadialFunction radial_rearrangement(const LevelProfile& p) {
  RadialFunction g;
  g.dimension = p.grid->dimension();
  g.R = radius_of_volume(g.dimension, p.support_volume);
  g.rho.push_back(0.0);
  g.value.push_back(p.max_value);
  for (std::size_t k = 0; k < p.thresholds.size(); ++k) {
    const double r = radius_of_volume(g.dimension, p.F[k]);
    if (r <= g.rho.back()) continue;
    if (r >= g.R) break;
    g.rho.push_back(r);
    g.value.push_back(p.thresholds[k]);
  }
  g.rho.push_back(g.R);
  g.value.push_back(0.0);
  return g;
}

namespace {

std::pair<double, double> layer_cake(const LevelProfile& p,
                                     const std::function<double(double)>& lambda) {
  require(lambda(0.0) == 0.0, ErrorCode::DomainError, "lambda(0) must vanish");
  // Ascending partition 0 = s_0 < s_1 < ... of the distinct thresholds. On
  // (s_i, s_{i+1}) F runs from Vol{phi > s_i} down to Vol{phi >= s_{i+1}}.
  std::vector<double> s{0.0};
  for (auto k = p.thresholds.size(); k-- > 0;)
    if (p.thresholds[k] > s.back()) s.push_back(p.thresholds[k]);
  double lhs = 0.0;
  const auto& I = *p.interpolant;
  // Each interval is split into kSub trapezoids; F is exact between thresholds.
  constexpr int kSub = 4;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double ds = (s[i + 1] - s[i]) / kSub;
    double a = s[i], fa = I.volume_above(a);
    for (int j = 1; j <= kSub; ++j) {
      const double b = j == kSub ? s[i + 1] : s[i] + j * ds;
      const double fb = I.volume_at_least(b);
      lhs += (lambda(b) - lambda(a)) * 0.5 * (fa + fb);
      a = b;
      fa = I.volume_above(b);
    }
  }
  return {lhs, I.integrate(lambda)};
}

CoareaLevel coarea_level(const Interpolant& I, double t, const CoareaOptions& opts) {
  const auto lvl = I.level(t);
  require(lvl.triangles > 0, ErrorCode::DegenerateLevel, "level set is empty");
  require(lvl.min_gradient >= opts.floor * I.max_gradient(), ErrorCode::DegenerateLevel,
          "gradient nearly vanishes on the level set");
  CoareaLevel c;
  c.t = t;
  c.area = lvl.length;
  c.grad_int = lvl.grad_int;
  c.inv_grad_int = lvl.inv_grad_int;
  // g is constant on its level sphere with |grad g| = A / (-F'(t)), and
  // -F'(t) is the same for phi and g.
  const int n = 2;
  c.area_bar = sphere_area(n, radius_of_volume(n, I.volume_at_least(t)));
  c.inv_grad_int_bar = lvl.inv_grad_int;
  c.grad_int_bar = c.area_bar * c.area_bar / lvl.inv_grad_int;
  c.holder = c.area * c.area <= c.grad_int * c.inv_grad_int * (1.0 + opts.tol);
  c.comparison = c.grad_int >= c.grad_int_bar * (1.0 - opts.tol);
  return c;
}

}  // namespace

std::pair<double, double> layer_cake(const ScalarField& phi,
                                     const std::function<double(double)>& lambda, int K) {
  require(lambda(0.0) == 0.0, ErrorCode::DomainError, "lambda(0) must vanish");
  return layer_cake(distribution(phi, K), lambda);
}

std::pair<double, double> dirichlet_compare(const ScalarField& phi, int K) {
  const RadialFunction g = radial_rearrangement(distribution(phi, K));
  return {dirichlet_form(phi, phi), g.dirichlet()};
}

CoareaLevel coarea_chain(const ScalarField& phi, double t, const CoareaOptions& opts) {
  require(t > 0.0, ErrorCode::InvalidArgument, "level must be positive");
  check_field(phi);
  return coarea_level(Interpolant(phi), t, opts);
}

CoareaSweep coarea_sweep(const LevelProfile& profile, const CoareaOptions& opts) {
  CoareaSweep sweep;
  // Midpoints between thresholds keep the levels off node values, where F
  // has kinks and the level set runs along triangle edges.
  for (std::size_t k = 1; k < profile.thresholds.size(); ++k) {
    if (profile.thresholds[k] == profile.thresholds[k - 1]) continue;
    const double t = 0.5 * (profile.thresholds[k] + profile.thresholds[k - 1]);
    try {
      CoareaLevel lv = coarea_level(*profile.interpolant, t, opts);
      if (!lv.holder || !lv.comparison) sweep.all_hold = false;
      sweep.levels.push_back(lv);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateLevel) throw;
      sweep.degenerate.push_back(t);
    }
  }
  return sweep;
}

double symmetrization_functional(const ScalarField& phi) {
  check_field(phi);
  const Interpolant I(phi);
  const double m = I.integrate([](double v) { return v * v; });
  require(m > 0.0, ErrorCode::DomainError, "field vanishes identically");
  const double s2 = 1.0 / m;
  const double ent = I.integrate([s2](double v) { return xlogx(s2 * v * v); });
  return 2.0 * s2 * I.dirichlet() - ent - (std::log(2.0 * kPi) + 2.0);
}

double symmetrization_functional(const RadialFunction& g, double scale) {
  const int n = g.dimension;
  const double s2 = scale * scale;
  const double ent = g.integrate([s2](double v) { return xlogx(s2 * v * v); });
  const double mass = s2 * g.integrate([](double v) { return v * v; });
  return 2.0 * s2 * g.dirichlet() - ent - (0.5 * n * std::log(2.0 * kPi) + n) * mass;
}

SymmetrizationReport symmetrize(const ScalarField& phi, int K) {
  const LevelProfile p = distribution(phi, K);
  const RadialFunction g = radial_rearrangement(p);
  const auto& I = *p.interpolant;
  const auto& vol = phi.grid()->node_volumes();
  SymmetrizationReport r;
  r.cell_volume = *std::max_element(vol.begin(), vol.end());
  for (std::size_t k = 0; k < p.thresholds.size(); ++k)
    r.max_equimeasure_gap =
        std::max(r.max_equimeasure_gap, std::abs(p.F[k] - g.volume_at_least(p.thresholds[k])));
  const auto [lc_lhs, lc_rhs] = layer_cake(p, [](double s) { return s * s; });
  r.layer_cake_relerr = std::abs(lc_lhs - lc_rhs) / std::abs(lc_rhs);
  r.l2_phi = lc_rhs;
  r.l2_g = g.integrate([](double v) { return v * v; });
  r.entropy_phi = I.integrate([](double v) { return xlogx(v * v); });
  r.entropy_g = g.integrate([](double v) { return xlogx(v * v); });
  r.energy_phi = dirichlet_form(phi, phi);
  r.energy_g = g.dirichlet();
  r.functional_phi = symmetrization_functional(phi);
  r.functional_g = symmetrization_functional(g, 1.0 / std::sqrt(r.l2_phi));
  r.coarea = coarea_sweep(p);
  return r;
}

ScalarField random_bump_field(const GridPtr& grid, std::uint64_t seed) {
  require_box(*grid);
  const auto& d = grid->descriptor();
  const double half = 0.5 * std::min(d.length1, d.length2);
  std::mt19937_64 rng(seed);
  // Uniform doubles from the raw 64-bit stream, identical on every platform.
  auto uniform = [&](double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  struct Bump {
    double a, cx, cy, s;
  };
  std::vector<Bump> bumps(1 + rng() % 4);
  for (auto& b : bumps) {
    b.a = uniform(0.3, 1.0);
    b.cx = uniform(-0.5 * half, 0.5 * half);
    b.cy = uniform(-0.5 * half, 0.5 * half);
    b.s = uniform(0.15 * half, 0.45 * half);
  }
  return ScalarField::from_nodes(grid, [&](int k) {
    const double x = grid->euclid_x(k), y = grid->euclid_y(k);
    double v = 0.0;
    for (const auto& b : bumps) {
      const double q = 1.0 - ((x - b.cx) * (x - b.cx) + (y - b.cy) * (y - b.cy)) / (b.s * b.s);
      if (q > 0.0) v += b.a * q * q * q;
    }
    return v;
  });
}

}  // namespace entropy_lab
