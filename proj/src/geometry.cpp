#include "entropy_lab/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace entropy_lab {

namespace {

constexpr double kPi = std::numbers::pi;

// Five-point Gauss-Legendre on [a, b].
double gauss5(const std::function<double(double)>& fn, double a, double b) {
  static constexpr std::array<double, 5> x = {0.0, 0.5384693101056831, -0.5384693101056831,
                                              0.9061798459386640, -0.9061798459386640};
  static constexpr std::array<double, 5> w = {0.5688888888888889, 0.4786286704993665,
                                              0.4786286704993665, 0.2369268850561891,
                                              0.2369268850561891};
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double s = 0.0;
  for (int k = 0; k < 5; ++k) s += w[k] * fn(mid + half * x[k]);
  return s * half;
}

double periodic_offset(double d, double length) {
  d = std::fmod(d, length);
  if (d < 0) d += length;
  return std::min(d, length - d);
}

}  // namespace

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidMetric: return "InvalidMetric";
    case ErrorCode::PoleMismatch: return "PoleMismatch";
    case ErrorCode::InvalidTau: return "InvalidTau";
    case ErrorCode::UnsupportedBase: return "UnsupportedBase";
    case ErrorCode::StepFailure: return "StepFailure";
    case ErrorCode::TruncationError: return "TruncationError";
    case ErrorCode::UnderResolved: return "UnderResolved";
    case ErrorCode::LogDomain: return "LogDomain";
    case ErrorCode::ConstraintViolated: return "ConstraintViolated";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::UnsupportedGrid: return "UnsupportedGrid";
    case ErrorCode::DegenerateLevel: return "DegenerateLevel";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

const char* to_string(GridKind kind) noexcept {
  switch (kind) {
    case GridKind::Circle: return "circle";
    case GridKind::FlatTorus: return "torus";
    case GridKind::WarpedSurface: return "warped";
    case GridKind::EuclideanBox: return "box";
    case GridKind::EuclideanDisc: return "disc";
  }
  return "unknown";
}

WarpProfile WarpProfile::round_sphere() {
  return {"sin", [](double r) { return std::sin(r); }, [](double r) { return std::cos(r); },
          [](double r) { return -std::sin(r); }};
}

WarpProfile WarpProfile::flat() {
  return {"linear", [](double r) { return r; }, [](double) { return 1.0; },
          [](double) { return 0.0; }};
}

WarpProfile WarpProfile::hyperbolic() {
  return {"sinh", [](double r) { return std::sinh(r); }, [](double r) { return std::cosh(r); },
          [](double r) { return std::sinh(r); }};
}

ManifoldDescriptor ManifoldDescriptor::circle(double length) {
  ManifoldDescriptor d;
  d.kind = GridKind::Circle;
  d.length1 = length;
  return d;
}

ManifoldDescriptor ManifoldDescriptor::torus(double l1, double l2) {
  ManifoldDescriptor d;
  d.kind = GridKind::FlatTorus;
  d.length1 = l1;
  d.length2 = l2;
  return d;
}

ManifoldDescriptor ManifoldDescriptor::warped(WarpProfile warp, double radius,
                                              bool pole_at_start, bool pole_at_end) {
  ManifoldDescriptor d;
  d.kind = GridKind::WarpedSurface;
  d.warp = std::move(warp);
  d.radius = radius;
  d.pole_at_start = pole_at_start;
  d.pole_at_end = pole_at_end;
  return d;
}

ManifoldDescriptor ManifoldDescriptor::sphere() {
  return warped(WarpProfile::round_sphere(), kPi, true, true);
}

ManifoldDescriptor ManifoldDescriptor::box(double lx, double ly) {
  ManifoldDescriptor d;
  d.kind = GridKind::EuclideanBox;
  d.length1 = lx;
  d.length2 = ly;
  return d;
}

ManifoldDescriptor ManifoldDescriptor::disc(double radius) {
  ManifoldDescriptor d = warped(WarpProfile::flat(), radius, true, false);
  d.kind = GridKind::EuclideanDisc;
  return d;
}

GridPtr ManifoldGrid::build(const ManifoldDescriptor& desc, Resolution res) {
  std::shared_ptr<ManifoldGrid> g(new ManifoldGrid());
  g->desc_ = desc;
  if (desc.kind == GridKind::Circle) res.n2 = 1;
  require(res.n1 >= 8 && (desc.kind == GridKind::Circle || res.n2 >= 8),
          ErrorCode::InvalidArgument, "resolution must be at least 8 per axis");
  if (desc.kind == GridKind::WarpedSurface || desc.kind == GridKind::EuclideanDisc) {
    g->build_warped(res);
  } else {
    g->build_flat(res);
  }
  g->finish();
  return g;
}

GridPtr build_grid(const ManifoldDescriptor& desc, Resolution res) {
  return ManifoldGrid::build(desc, res);
}

void ManifoldGrid::build_flat(Resolution res) {
  const bool circle = kind() == GridKind::Circle;
  const bool box = kind() == GridKind::EuclideanBox;
  require(desc_.length1 > 0 && (circle || desc_.length2 > 0), ErrorCode::InvalidMetric,
          "side lengths must be positive");
  n1_ = res.n1;
  n2_ = circle ? 1 : res.n2;
  h1_ = desc_.length1 / n1_;
  h2_ = circle ? 1.0 : desc_.length2 / n2_;
  max_width_ = circle ? h1_ : std::max(h1_, h2_);
  const int n = node_count();
  c1_.resize(n);
  c2_.resize(n);
  volumes_.assign(n, circle ? h1_ : h1_ * h2_);
  phi_.assign(n, 1.0);
  dphi_.assign(n, 0.0);
  curvature_.assign(n, 0.0);
  const double x0 = box ? -0.5 * desc_.length1 + 0.5 * h1_ : 0.0;
  const double y0 = box ? -0.5 * desc_.length2 + 0.5 * h2_ : 0.0;
  for (int i = 0; i < n1_; ++i) {
    for (int j = 0; j < n2_; ++j) {
      const int k = index(i, j);
      c1_[k] = x0 + i * h1_;
      c2_[k] = circle ? 0.0 : y0 + j * h2_;
    }
  }

  if (circle) {
    for (int i = 0; i < n1_; ++i) edges_.push_back({i, (i + 1) % n1_, 1.0 / h1_, 0});
    return;
  }
  const double wx = h2_ / h1_;
  const double wy = h1_ / h2_;
  for (int i = 0; i < n1_; ++i) {
    for (int j = 0; j < n2_; ++j) {
      const int k = index(i, j);
      if (i + 1 < n1_) {
        edges_.push_back({k, index(i + 1, j), wx, 0});
      } else if (!box) {
        edges_.push_back({k, index(0, j), wx, 0});
      }
      if (j + 1 < n2_) {
        edges_.push_back({k, index(i, j + 1), wy, 1});
      } else if (!box) {
        edges_.push_back({k, index(i, 0), wy, 1});
      }
    }
  }
  if (box) {
    for (int j = 0; j < n2_; ++j) {
      boundary_.push_back({index(0, j), -1.0, 0.0, h2_, 0.0});
      boundary_.push_back({index(n1_ - 1, j), 1.0, 0.0, h2_, 0.0});
    }
    for (int i = 0; i < n1_; ++i) {
      boundary_.push_back({index(i, 0), 0.0, -1.0, h1_, 0.0});
      boundary_.push_back({index(i, n2_ - 1), 0.0, 1.0, h1_, 0.0});
    }
  }
}

void ManifoldGrid::build_warped(Resolution res) {
  const auto& w = desc_.warp;
  require(static_cast<bool>(w.phi) && static_cast<bool>(w.dphi) && static_cast<bool>(w.ddphi),
          ErrorCode::InvalidMetric, "warp profile is incomplete");
  require(desc_.radius > 0, ErrorCode::InvalidMetric, "radial extent must be positive");
  require(res.n2 % 2 == 0, ErrorCode::InvalidArgument,
          "angular resolution must be even for the pole parity ghost");
  const double R = desc_.radius;
  n1_ = res.n1;
  n2_ = res.n2;
  h1_ = R / n1_;
  h2_ = 2.0 * kPi / n2_;

  constexpr double kPoleTol = 1e-10;
  if (desc_.pole_at_start) {
    require(std::abs(w.phi(0.0)) < kPoleTol && std::abs(w.dphi(0.0) - 1.0) < 1e-8,
            ErrorCode::PoleMismatch, "declared pole at r = 0 needs phi(0) = 0, phi'(0) = 1");
  } else {
    require(w.phi(0.0) > 0, ErrorCode::InvalidMetric, "phi(0) must be positive without a pole");
  }
  if (desc_.pole_at_end) {
    require(std::abs(w.phi(R)) < kPoleTol && std::abs(w.dphi(R) + 1.0) < 1e-8,
            ErrorCode::PoleMismatch, "declared pole at r = R needs phi(R) = 0, phi'(R) = -1");
  } else {
    require(w.phi(R) > 0, ErrorCode::InvalidMetric, "phi(R) must be positive without a pole");
  }
  // phi > 0 on the open interval, probed at nodes, faces and a fine sample.
  const int probes = 8 * n1_;
  for (int k = 1; k < probes; ++k) {
    const double r = R * k / probes;
    require(w.phi(r) > 0 && std::isfinite(w.phi(r)), ErrorCode::InvalidMetric,
            "warp profile must be positive on the open interval");
  }

  const int n = node_count();
  c1_.resize(n);
  c2_.resize(n);
  volumes_.resize(n);
  phi_.resize(n);
  dphi_.resize(n);
  curvature_.resize(n);
  max_width_ = h1_;
  for (int i = 0; i < n1_; ++i) {
    const double r = (i + 0.5) * h1_;
    const double ph = w.phi(r);
    const double cell = gauss5(w.phi, i * h1_, (i + 1) * h1_) * h2_;
    max_width_ = std::max(max_width_, ph * h2_);
    for (int j = 0; j < n2_; ++j) {
      const int k = index(i, j);
      c1_[k] = r;
      c2_[k] = j * h2_;
      volumes_[k] = cell;
      phi_[k] = ph;
      dphi_[k] = w.dphi(r);
      curvature_[k] = -w.ddphi(r) / ph;
    }
  }

  for (int i = 0; i < n1_; ++i) {
    const double r = (i + 0.5) * h1_;
    const double w_ang = h1_ / (w.phi(r) * h2_);
    const double w_rad = (i + 1 < n1_) ? w.phi((i + 1) * h1_) * h2_ / h1_ : 0.0;
    for (int j = 0; j < n2_; ++j) {
      const int k = index(i, j);
      edges_.push_back({k, index(i, (j + 1) % n2_), w_ang, 1});
      if (i + 1 < n1_) edges_.push_back({k, index(i + 1, j), w_rad, 0});
    }
  }

  if (!desc_.pole_at_start) {
    const double p0 = w.phi(0.0);
    for (int j = 0; j < n2_; ++j) {
      const double th = j * h2_;
      boundary_.push_back({index(0, j), -std::cos(th), -std::sin(th), p0 * h2_,
                           -w.dphi(0.0) / p0});
    }
  }
  if (!desc_.pole_at_end) {
    const double pR = w.phi(R);
    for (int j = 0; j < n2_; ++j) {
      const double th = j * h2_;
      boundary_.push_back({index(n1_ - 1, j), std::cos(th), std::sin(th), pR * h2_,
                           w.dphi(R) / pR});
    }
  }
}

void ManifoldGrid::finish() {
  total_volume_ = 0.0;
  for (double v : volumes_) {
    require(v > 0, ErrorCode::InvalidMetric, "node volume must be positive");
    total_volume_ += v;
  }
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(4 * edges_.size());
  for (const auto& e : edges_) {
    trip.emplace_back(e.a, e.b, e.weight);
    trip.emplace_back(e.b, e.a, e.weight);
    trip.emplace_back(e.a, e.a, -e.weight);
    trip.emplace_back(e.b, e.b, -e.weight);
  }
  stiffness_.resize(node_count(), node_count());
  stiffness_.setFromTriplets(trip.begin(), trip.end());
  stiffness_.makeCompressed();
}

double ManifoldGrid::coord(int node, int axis) const {
  return axis == 0 ? c1_[node] : c2_[node];
}

double ManifoldGrid::euclid_x(int node) const {
  if (kind() == GridKind::WarpedSurface || kind() == GridKind::EuclideanDisc)
    return c1_[node] * std::cos(c2_[node]);
  return c1_[node];
}

double ManifoldGrid::euclid_y(int node) const {
  if (kind() == GridKind::WarpedSurface || kind() == GridKind::EuclideanDisc)
    return c1_[node] * std::sin(c2_[node]);
  return c2_[node];
}

bool ManifoldGrid::euclidean() const {
  return kind() == GridKind::EuclideanBox || kind() == GridKind::EuclideanDisc;
}

double ManifoldGrid::gauss_curvature(int node) const { return curvature_[node]; }
double ManifoldGrid::warp(int node) const { return phi_[node]; }
double ManifoldGrid::warp_slope(int node) const { return dphi_[node]; }

int ManifoldGrid::neighbor(int node, int axis, int dir) const {
  const int i = i_of(node);
  const int j = j_of(node);
  const bool warped = kind() == GridKind::WarpedSurface || kind() == GridKind::EuclideanDisc;
  if (axis == 0) {
    const int ni = i + dir;
    if (ni >= 0 && ni < n1_) return index(ni, j);
    if (periodic()) return index((ni + n1_) % n1_, j);
    if (warped) {
      const bool pole = ni < 0 ? desc_.pole_at_start : desc_.pole_at_end;
      if (pole) return index(i, (j + n2_ / 2) % n2_);
    }
    return node;
  }
  if (kind() == GridKind::Circle) return node;
  const int nj = j + dir;
  if (nj >= 0 && nj < n2_) return index(i, nj);
  if (kind() == GridKind::EuclideanBox) return node;
  return index(i, (nj + n2_) % n2_);
}

double ManifoldGrid::cut_locus_distance(int node, const BasePoint& base) const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (kind()) {
    case GridKind::Circle:
      return 0.5 * desc_.length1 - periodic_offset(c1_[node] - base.x, desc_.length1);
    case GridKind::FlatTorus:
      return std::min(0.5 * desc_.length1 - periodic_offset(c1_[node] - base.x, desc_.length1),
                      0.5 * desc_.length2 - periodic_offset(c2_[node] - base.y, desc_.length2));
    case GridKind::WarpedSurface:
      return desc_.pole_at_end ? desc_.radius - c1_[node] : inf;
    default:
      return inf;
  }
}

ScalarField::ScalarField(GridPtr grid, double fill)
    : grid_(std::move(grid)), values_(grid_->node_count(), fill) {}

ScalarField::ScalarField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  require(static_cast<int>(values_.size()) == grid_->node_count(), ErrorCode::InvalidArgument,
          "field length does not match grid node count");
}

ScalarField ScalarField::from_nodes(GridPtr grid, const std::function<double(int)>& fn) {
  std::vector<double> v(grid->node_count());
  for (int k = 0; k < grid->node_count(); ++k) v[k] = fn(k);
  return ScalarField(std::move(grid), std::move(v));
}

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

bool ScalarField::all_positive() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v > 0.0; });
}

double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }
double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }

ScalarField laplace_beltrami(const ScalarField& f) {
  const auto& g = *f.grid();
  ScalarField out(f.grid());
  for (const auto& e : g.edges()) {
    const double flux = e.weight * (f[e.b] - f[e.a]);
    out[e.a] += flux;
    out[e.b] -= flux;
  }
  const auto& vol = g.node_volumes();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] /= vol[k];
  return out;
}

ScalarField gradient_dot(const ScalarField& f, const ScalarField& h) {
  const auto& g = *f.grid();
  ScalarField out(f.grid());
  for (const auto& e : g.edges()) {
    const double c = 0.5 * e.weight * (f[e.b] - f[e.a]) * (h[e.b] - h[e.a]);
    out[e.a] += c;
    out[e.b] += c;
  }
  const auto& vol = g.node_volumes();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] /= vol[k];
  return out;
}

ScalarField gradient_sq(const ScalarField& f) { return gradient_dot(f, f); }

double dirichlet_form(const ScalarField& f, const ScalarField& h) {
  double s = 0.0;
  for (const auto& e : f.grid()->edges()) s += e.weight * (f[e.b] - f[e.a]) * (h[e.b] - h[e.a]);
  return s;
}

HessianField hessian(const ScalarField& f) {
  const auto& g = *f.grid();
  const int n = g.node_count();
  HessianField H{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                 std::vector<double>(n, 0.0)};
  const double h1 = g.spacing(0);
  const double h2 = g.spacing(1);
  const bool warped =
      g.kind() == GridKind::WarpedSurface || g.kind() == GridKind::EuclideanDisc;
  for (int k = 0; k < n; ++k) {
    const int ip = g.neighbor(k, 0, 1);
    const int im = g.neighbor(k, 0, -1);
    const double f1 = (f[ip] - f[im]) / (2.0 * h1);
    const double f11 = (f[ip] - 2.0 * f[k] + f[im]) / (h1 * h1);
    if (g.dimension() == 1) {
      H.h11[k] = f11;
      continue;
    }
    const int jp = g.neighbor(k, 1, 1);
    const int jm = g.neighbor(k, 1, -1);
    const double f2 = (f[jp] - f[jm]) / (2.0 * h2);
    const double f22 = (f[jp] - 2.0 * f[k] + f[jm]) / (h2 * h2);
    const double f12 = (f[g.neighbor(ip, 1, 1)] - f[g.neighbor(ip, 1, -1)] -
                        f[g.neighbor(im, 1, 1)] + f[g.neighbor(im, 1, -1)]) /
                       (4.0 * h1 * h2);
    if (!warped) {
      H.h11[k] = f11;
      H.h12[k] = f12;
      H.h22[k] = f22;
      continue;
    }
    const double phi = g.warp(k);
    H.h11[k] = f11;
    H.h12[k] = (f12 - g.christoffel_t_rt(k) * f2) / phi;
    H.h22[k] = (f22 - g.christoffel_r_tt(k) * f1) / (phi * phi);
  }
  return H;
}

ScalarField hessian_quadratic(const ScalarField& f, double tau) {
  require(tau > 0, ErrorCode::InvalidTau, "tau must be positive");
  const double c = 1.0 / (2.0 * tau);
  const HessianField H = hessian(f);
  const bool one_d = f.grid()->dimension() == 1;
  ScalarField out(f.grid());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double a = H.h11[k] - c;
    out[k] = one_d ? a * a : a * a + 2.0 * H.h12[k] * H.h12[k] + (H.h22[k] - c) * (H.h22[k] - c);
  }
  return out;
}

ScalarField ricci_quadratic(const ScalarField& f) {
  const auto& g = *f.grid();
  ScalarField out = gradient_sq(f);
  for (int k = 0; k < g.node_count(); ++k) out[k] *= g.gauss_curvature(k);
  return out;
}

double integrate(const ScalarField& f) {
  const auto& vol = f.grid()->node_volumes();
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) s += f[k] * vol[k];
  return s;
}

ScalarField distance_field(const GridPtr& grid, const BasePoint& base) {
  const auto& g = *grid;
  const auto& d = g.descriptor();
  switch (g.kind()) {
    case GridKind::Circle:
      return ScalarField::from_nodes(grid, [&](int k) {
        return periodic_offset(g.coord(k, 0) - base.x, d.length1);
      });
    case GridKind::FlatTorus:
      return ScalarField::from_nodes(grid, [&](int k) {
        return std::hypot(periodic_offset(g.coord(k, 0) - base.x, d.length1),
                          periodic_offset(g.coord(k, 1) - base.y, d.length2));
      });
    case GridKind::EuclideanBox:
    case GridKind::EuclideanDisc: {
      const double bx = base.pole ? 0.0 : base.x;
      const double by = base.pole ? 0.0 : base.y;
      return ScalarField::from_nodes(grid, [&](int k) {
        return std::hypot(g.euclid_x(k) - bx, g.euclid_y(k) - by);
      });
    }
    case GridKind::WarpedSurface:
      require(base.pole, ErrorCode::UnsupportedBase,
              "distances on a warped surface are only available from the pole");
      return ScalarField::from_nodes(grid, [&](int k) { return g.coord(k, 0); });
  }
  throw Error(ErrorCode::InvalidArgument, "unknown grid kind");
}

namespace {
template <typename Op>
ScalarField zip(const ScalarField& a, const ScalarField& b, Op op) {
  require(a.size() == b.size(), ErrorCode::InvalidArgument, "field size mismatch");
  ScalarField out(a.grid());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = op(a[k], b[k]);
  return out;
}
}  // namespace

ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  return zip(a, b, [](double x, double y) { return x * y; });
}
ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  return zip(a, b, [](double x, double y) { return x + y; });
}
ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  return zip(a, b, [](double x, double y) { return x - y; });
}
ScalarField operator*(double s, const ScalarField& a) {
  ScalarField out(a.grid());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = s * a[k];
  return out;
}

}  // namespace entropy_lab
