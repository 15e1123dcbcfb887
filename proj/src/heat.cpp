#include "entropy_lab/heat.hpp"

#include <Eigen/SparseCholesky>
#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <numbers>

namespace entropy_lab {

namespace {

constexpr double kPi = std::numbers::pi;

double periodic_offset(double d, double length) {
  d = std::fmod(d, length);
  if (d < 0) d += length;
  return std::min(d, length - d);
}

}  // namespace

std::optional<KernelOracle> KernelOracle::for_grid(const ManifoldGrid& grid) {
  switch (grid.kind()) {
    case GridKind::Circle: return KernelOracle{Kind::CircleTheta};
    case GridKind::FlatTorus: return KernelOracle{Kind::TorusTheta};
    case GridKind::WarpedSurface:
      if (grid.descriptor().warp.name == "sin" &&
          std::abs(grid.descriptor().radius - kPi) < 1e-12)
        return KernelOracle{Kind::SphereLegendre};
      return std::nullopt;
    default: return std::nullopt;
  }
}

double circle_kernel(double d, double t, double length, bool fourier) {
  require(t > 0, ErrorCode::InvalidArgument, "kernel time must be positive");
  d = periodic_offset(d, length);
  if (fourier) {
    const double k0 = 2.0 * kPi / length;
    double s = 1.0;
    for (int k = 1;; ++k) {
      const double a = std::exp(-k0 * k0 * k * k * t);
      if (a < 1e-22) break;
      s += 2.0 * a * std::cos(k0 * k * d);
    }
    return s / length;
  }
  // Images d + m L; relative cutoff e^-60 against the leading term.
  const double lead = d * d / (4.0 * t);
  double s = 0.0;
  for (int m = 0;; ++m) {
    bool any = false;
    for (int sign : {1, -1}) {
      if (m == 0 && sign < 0) continue;
      const double x = d + sign * m * length;
      const double e = x * x / (4.0 * t) - lead;
      if (e < 60.0) {
        s += std::exp(-e);
        any = true;
      }
    }
    if (!any && m > 0) break;
  }
  return s * std::exp(-lead) / std::sqrt(4.0 * kPi * t);
}

namespace {

// Natural log of a lower estimate for min_r H(r, t) on the unit sphere.
double log_sphere_floor(double t) {
  return -kPi * kPi / (4.0 * t) - std::log(4.0 * kPi * t) - 5.0;
}

template <unsigned Digits>
std::vector<double> legendre_sum(const std::vector<double>& r, double t, int L) {
  using Real = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<Digits>>;
  const Real four_pi = 4 * boost::math::constants::pi<Real>();
  std::vector<Real> coef(L + 1);
  for (int l = 0; l <= L; ++l)
    coef[l] = Real(2 * l + 1) / four_pi * exp(-Real(l) * (l + 1) * Real(t));
  std::vector<double> out(r.size());
  for (std::size_t k = 0; k < r.size(); ++k) {
    const Real x = cos(Real(r[k]));
    Real p_prev = 1;
    Real p = x;
    Real s = coef[0] + (L >= 1 ? coef[1] * x : Real(0));
    for (int l = 1; l < L; ++l) {
      const Real p_next = ((2 * l + 1) * x * p - l * p_prev) / (l + 1);
      p_prev = p;
      p = p_next;
      s += coef[l + 1] * p;
    }
    out[k] = static_cast<double>(s);
  }
  return out;
}

}  // namespace

int required_sphere_degree(double t, double tolerance) {
  require(t > 0, ErrorCode::InvalidArgument, "kernel time must be positive");
  require(tolerance > 0 && tolerance < 1, ErrorCode::InvalidArgument,
          "tolerance must lie in (0, 1)");
  // sum_{l > L} (2l+1)/(4 pi) e^{-l(l+1)t} <= e^{-L(L+1)t} / (4 pi t), held
  // below tolerance times the smallest kernel value.
  const double need = -std::log(tolerance) - log_sphere_floor(t) - std::log(4.0 * kPi * t);
  if (need <= 0) return 1;
  const double L = 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * need / t));
  return static_cast<int>(std::ceil(L)) + 1;
}

std::vector<double> sphere_kernel(const std::vector<double>& r, double t, int max_degree,
                                  double tolerance) {
  const int L = required_sphere_degree(t, tolerance);
  if (L > max_degree)
    throw TruncationError("sphere Legendre series needs degree " + std::to_string(L) +
                              " at t = " + std::to_string(t),
                          L);
  // Terms reach 1/(4 pi t) while the antipodal value is near e^{-pi^2/(4t)}.
  const double digits = (-log_sphere_floor(t) + std::log(1.0 / (4.0 * kPi * t) + 1.0) -
                         std::log(tolerance)) / std::log(10.0) + 10.0;
  if (digits <= 100) return legendre_sum<100>(r, t, L);
  if (digits <= 200) return legendre_sum<200>(r, t, L);
  if (digits <= 400) return legendre_sum<400>(r, t, L);
  if (digits <= 800) return legendre_sum<800>(r, t, L);
  throw TruncationError("sphere Legendre series needs more than 800 digits at t = " +
                            std::to_string(t),
                        L);
}

ScalarField kernel(const KernelOracle& oracle, const GridPtr& grid, const BasePoint& base,
                   double t) {
  require(t > 0, ErrorCode::InvalidArgument, "kernel time must be positive");
  const auto& g = *grid;
  const auto& d = g.descriptor();
  switch (oracle.kind) {
    case KernelOracle::Kind::CircleTheta:
      require(g.kind() == GridKind::Circle, ErrorCode::UnsupportedGrid,
              "circle oracle needs a circle grid");
      return ScalarField::from_nodes(grid, [&](int k) {
        return circle_kernel(g.coord(k, 0) - base.x, t, d.length1);
      });
    case KernelOracle::Kind::TorusTheta: {
      require(g.kind() == GridKind::FlatTorus, ErrorCode::UnsupportedGrid,
              "torus oracle needs a torus grid");
      std::vector<double> kx(g.n1()), ky(g.n2());
      for (int i = 0; i < g.n1(); ++i)
        kx[i] = circle_kernel(g.coord(g.index(i, 0), 0) - base.x, t, d.length1);
      for (int j = 0; j < g.n2(); ++j)
        ky[j] = circle_kernel(g.coord(g.index(0, j), 1) - base.y, t, d.length2);
      return ScalarField::from_nodes(grid, [&](int k) { return kx[g.i_of(k)] * ky[g.j_of(k)]; });
    }
    case KernelOracle::Kind::SphereLegendre: {
      require(KernelOracle::for_grid(g).has_value() &&
                  KernelOracle::for_grid(g)->kind == KernelOracle::Kind::SphereLegendre,
              ErrorCode::UnsupportedGrid, "Legendre oracle needs the round sphere");
      require(base.pole, ErrorCode::UnsupportedBase, "Legendre oracle needs the pole as base");
      std::vector<double> radii(g.n1());
      for (int i = 0; i < g.n1(); ++i) radii[i] = g.coord(g.index(i, 0), 0);
      const auto vals = sphere_kernel(radii, t, oracle.max_degree, oracle.tolerance);
      return ScalarField::from_nodes(grid, [&](int k) { return vals[g.i_of(k)]; });
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown oracle");
}

double resolution_floor(const ManifoldGrid& grid) {
  const double h = grid.kind() == GridKind::WarpedSurface || grid.kind() == GridKind::EuclideanDisc
                       ? grid.spacing(0)
                       : grid.max_cell_width();
  return 10.0 * h * h;
}

HeatState delta_init(const GridPtr& grid, const BasePoint& base, double t0, double tau0) {
  require(t0 >= resolution_floor(*grid), ErrorCode::UnderResolved,
          "t0 = " + std::to_string(t0) + " is below the resolution floor " +
              std::to_string(resolution_floor(*grid)));
  require(tau0 >= 0, ErrorCode::InvalidArgument, "tau0 must be nonnegative");
  ScalarField u;
  if (auto oracle = KernelOracle::for_grid(*grid)) {
    u = kernel(*oracle, grid, base, t0);
  } else {
    const ScalarField r = distance_field(grid, base);
    const double norm = std::pow(4.0 * kPi * t0, 0.5 * grid->dimension());
    u = ScalarField::from_nodes(grid, [&](int k) {
      return std::exp(-r[k] * r[k] / (4.0 * t0)) / norm;
    });
  }
  require(u.all_finite() && u.all_positive(), ErrorCode::UnderResolved,
          "initial kernel is not positive at every node");
  const double mass = integrate(u);
  for (std::size_t k = 0; k < u.size(); ++k) u[k] /= mass;
  return HeatState{std::move(u), t0, tau0, std::abs(mass - 1.0)};
}

struct HeatSolver::Factor {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
};

HeatSolver::HeatSolver(GridPtr grid, HeatOptions opts)
    : grid_(std::move(grid)), opts_(opts) {}

HeatSolver::~HeatSolver() = default;

const HeatSolver::Factor& HeatSolver::factor(double dt) const {
  std::lock_guard lock(mutex_);
  auto it = cache_.find(dt);
  if (it != cache_.end()) return *it->second;
  const auto& K = grid_->stiffness();
  Eigen::SparseMatrix<double> A = -0.5 * dt * K;
  const auto& vol = grid_->node_volumes();
  for (int k = 0; k < grid_->node_count(); ++k) A.coeffRef(k, k) += vol[k];
  auto f = std::make_unique<Factor>();
  f->ldlt.compute(A);
  require(f->ldlt.info() == Eigen::Success, ErrorCode::StepFailure,
          "factorization of the Crank-Nicolson matrix failed");
  return *cache_.emplace(dt, std::move(f)).first->second;
}

bool HeatSolver::substep(std::vector<double>& u, double dt, double& drift) const {
  const auto& g = *grid_;
  const auto& vol = g.node_volumes();
  const int n = g.node_count();
  Eigen::VectorXd b(n);
  for (int k = 0; k < n; ++k) b[k] = vol[k] * u[k];
  for (const auto& e : g.edges()) {
    const double flux = 0.5 * dt * e.weight * (u[e.b] - u[e.a]);
    b[e.a] += flux;
    b[e.b] -= flux;
  }
  for (int k = 0; k < n; ++k)
    if (!(b[k] > 0)) return false;
  const Eigen::VectorXd x = factor(dt).ldlt.solve(b);
  double mass = 0.0;
  for (int k = 0; k < n; ++k) {
    if (!(x[k] > 0) || !std::isfinite(x[k])) return false;
    mass += vol[k] * x[k];
  }
  for (int k = 0; k < n; ++k) u[k] = x[k] / mass;
  drift = std::max(drift, std::abs(mass - 1.0));
  return true;
}

HeatState HeatSolver::step(const HeatState& state, double dt) const {
  require(dt > 0 && dt <= opts_.max_dt, ErrorCode::InvalidArgument,
          "dt must lie in (0, max_dt]");
  require(state.u.grid() == grid_, ErrorCode::InvalidArgument, "state lives on another grid");
  for (int level = 0; level <= opts_.max_halvings; ++level) {
    const int pieces = 1 << level;
    const double sub = dt / pieces;
    std::vector<double> u = state.u.vec();
    double drift = 0.0;
    bool ok = true;
    for (int p = 0; p < pieces && ok; ++p) ok = substep(u, sub, drift);
    if (ok) return HeatState{ScalarField(grid_, std::move(u)), state.t + dt, state.tau0, drift};
  }
  throw Error(ErrorCode::StepFailure, "positivity lost after " +
                                          std::to_string(opts_.max_halvings) + " halvings");
}

HeatState HeatSolver::advance(const HeatState& state, double t_end, double dt) const {
  HeatState s = state;
  while (s.t < t_end - 1e-12 * std::max(1.0, t_end)) {
    const double h = std::min(dt, t_end - s.t);
    s = step(s, h);
  }
  return s;
}

}  // namespace entropy_lab
