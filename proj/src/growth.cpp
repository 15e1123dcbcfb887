#include "entropy_lab/growth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace entropy_lab {

namespace {

constexpr double kPi = std::numbers::pi;

double ball(const ManifoldGrid& g, const ScalarField& d, double r) {
  const double h = g.spacing(0);
  const auto& vol = g.node_volumes();
  double v = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) v += vol[k] * std::clamp((r - d[k]) / h + 0.5, 0.0, 1.0);
  return v;
}

}  // namespace

std::vector<double> VolumeProfile::area_ratio() const {
  std::vector<double> q(radii.size(), 0.0);
  for (std::size_t k = 0; k < radii.size(); ++k)
    if (volume[k] > 0.0) q[k] = radii[k] * area[k] / volume[k];
  return q;
}

VolumeProfile volume_profile(const GridPtr& grid, const BasePoint& base,
                             const std::vector<double>& radii) {
  const ScalarField d = distance_field(grid, base);
  const double dmax = *std::max_element(d.values().begin(), d.values().end());
  const double h = grid->spacing(0);
  VolumeProfile p;
  p.dimension = grid->dimension();
  p.base = base;
  for (double r : radii) {
    require(r > 0.0, ErrorCode::InvalidArgument, "radii must be positive");
    const bool clamp = r >= dmax;
    const double rc = std::min(r, dmax);
    const double lo = std::max(rc - 2.0 * h, 0.0), hi = rc + 2.0 * h;
    p.radii.push_back(rc);
    p.volume.push_back(clamp ? grid->total_volume() : ball(*grid, d, rc));
    p.area.push_back((ball(*grid, d, hi) - ball(*grid, d, lo)) / (hi - lo));
    p.clamped.push_back(clamp);
  }
  return p;
}

VolumeProfile power_profile(int dimension, double p, const std::vector<double>& radii, double c) {
  require(p > 0.0 && c > 0.0, ErrorCode::InvalidArgument, "power and scale must be positive");
  VolumeProfile v;
  v.dimension = dimension;
  for (double r : radii) {
    require(r > 0.0, ErrorCode::InvalidArgument, "radii must be positive");
    v.radii.push_back(r);
    v.volume.push_back(c * std::pow(r, p));
    v.area.push_back(c * p * std::pow(r, p - 1));
    v.clamped.push_back(false);
  }
  return v;
}

std::vector<double> dyadic_radii(double R, int levels) {
  require(R > 0.0 && levels >= 0, ErrorCode::InvalidArgument, "need R > 0 and levels >= 0");
  std::vector<double> r;
  for (int k = 0; k <= levels; ++k) r.push_back(std::ldexp(R, -k));
  return r;
}

double cutoff(double s) {
  const double q = std::clamp(2.0 * s - 1.0, 0.0, 1.0);
  return 1.0 - 3.0 * q * q + 2.0 * q * q * q;
}

double cutoff_slope(double s) {
  const double q = 2.0 * s - 1.0;
  if (q <= 0.0 || q >= 1.0) return 0.0;
  return -12.0 * q * (1.0 - q);
}

std::vector<KernelEntropyRow> kernel_entropy_bound(const GridPtr& grid, const BasePoint& base,
                                                   const std::vector<HeatState>& trajectory,
                                                   double tol) {
  const ScalarField d = distance_field(grid, base);
  const auto& vol = grid->node_volumes();
  const int n = grid->dimension();
  std::vector<KernelEntropyRow> rows;
  for (const auto& s : trajectory) {
    require(s.u.grid() == grid, ErrorCode::InvalidArgument, "state lives on another grid");
    KernelEntropyRow row;
    row.t = s.tau();
    ScalarField v = s.u;
    double peak = 0.0, moment = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      const double u = s.u[k];
      v[k] = std::sqrt(std::max(u, 0.0));
      if (u > 0.0) row.entropy -= vol[k] * u * std::log(u);
      peak = std::max(peak, u);
      moment += vol[k] * d[k] * d[k] * u;
    }
    row.dirichlet = 4.0 * row.t * dirichlet_form(v, v);
    row.constant = -(n + 0.5 * n * std::log(4.0 * kPi * row.t));
    row.W = row.dirichlet + row.entropy + row.constant;
    row.lower_bound = -std::log(peak * std::pow(4.0 * kPi * row.t, 0.5 * n)) - n;
    row.moment = moment / (3.0 * row.t);
    row.log_volume = std::log(ball(*grid, d, std::sqrt(row.t)));
    row.finite = std::isfinite(row.dirichlet) && std::isfinite(row.entropy) &&
                 std::isfinite(row.W) && std::isfinite(row.moment);
    row.dirichlet_bound = row.dirichlet <= 0.5 * n + tol;
    rows.push_back(row);
  }
  return rows;
}

DoublingReport doubling_iteration(const VolumeProfile& profile, double eta) {
  require(eta > 0.0 && eta < 1.0, ErrorCode::InvalidArgument, "eta must lie in (0, 1)");
  const auto& r = profile.radii;
  const auto& V = profile.volume;
  require(r.size() >= 2, ErrorCode::InvalidArgument, "need at least two dyadic radii");
  for (std::size_t k = 1; k < r.size(); ++k)
    require(std::abs(r[k] - std::ldexp(r[0], -static_cast<int>(k))) <= 1e-12 * r[0],
            ErrorCode::InvalidArgument, "radii must be R, R/2, R/4, ...");
  DoublingReport rep;
  rep.eta = eta;
  rep.R = r[0];
  rep.exponent_bound = std::log2(1.0 / eta);
  const int K = static_cast<int>(r.size()) - 1;
  for (int k = 1; k <= K; ++k) {
    if (V[k] <= std::pow(eta, k) * V[0]) {
      rep.chain_length = k;
    } else {
      rep.broken_at = k;
      break;
    }
  }
  rep.persists = rep.broken_at == 0;
  const int k = std::max(rep.chain_length, 1);
  rep.exponent = std::log2(V[0] / V[k]) / k;
  rep.anomalous = rep.persists;
  return rep;
}

NoncollapseConstants noncollapse_constants(int n) {
  require(n >= 1, ErrorCode::InvalidArgument, "dimension must be positive");
  NoncollapseConstants c{};
  c.eta = std::pow(3.0, -n);
  c.C2 = -0.5 * n * std::log(4.0 * kPi);
  c.C1 = std::log(c.eta) + c.C2;
  // sup over the annulus of 4 zeta'^2 - zeta^2 log zeta^2, sampled finely.
  double q = 0.0;
  constexpr int kSamples = 20000;
  for (int i = 0; i <= kSamples; ++i) {
    const double s = 0.5 + 0.5 * i / kSamples;
    const double z2 = cutoff(s) * cutoff(s);
    const double dz = cutoff_slope(s);
    q = std::max(q, 4.0 * dz * dz - (z2 > 0.0 ? z2 * std::log(z2) : 0.0));
  }
  c.C3 = (1.0 - c.eta) / c.eta * q;
  return c;
}

NoncollapseReport mu_lower_to_volume(const GridPtr& grid, const BasePoint& base, double A,
                                     double R, int doubling_levels) {
  require(A >= 0.0, ErrorCode::InvalidArgument, "entropy bound A must be nonnegative");
  require(R > 0.0, ErrorCode::InvalidArgument, "radius must be positive");
  const ScalarField d = distance_field(grid, base);
  const auto& vol = grid->node_volumes();
  const int n = grid->dimension();
  const auto c = noncollapse_constants(n);

  NoncollapseReport rep;
  rep.dimension = n;
  rep.A = A;
  rep.R = R;
  rep.eta = c.eta;
  rep.C1 = c.C1;
  rep.C2 = c.C2;
  rep.C3 = c.C3;

  ScalarField h = ScalarField::from_nodes(grid, [&](int k) { return cutoff(d[k] / R); });
  double mass = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) mass += vol[k] * h[k] * h[k];
  require(mass > 0.0, ErrorCode::DomainError, "radius below the grid resolution");
  const double scale = 0.5 * n * std::log(4.0 * kPi * R * R);
  rep.B = std::log(mass) - scale;
  for (std::size_t k = 0; k < h.size(); ++k) h[k] /= std::sqrt(mass);
  double ent = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double h2 = h[k] * h[k];
    if (h2 > 0.0) ent += vol[k] * (std::log(h2) + scale) * h2;
  }
  rep.rhs = 4.0 * R * R * dirichlet_form(h, h) - ent;

  const auto prof = volume_profile(grid, base, {R, 0.5 * R});
  rep.volume = prof.volume[0];
  rep.half_volume = prof.volume[1];
  rep.ratio = rep.volume / std::pow(R, n);
  rep.kappa = std::exp(-A - c.C3 - c.C2);
  rep.doubling = rep.half_volume >= c.eta * rep.volume;
  const double lr = std::log(rep.ratio);
  rep.bracket = lr + c.C1 <= rep.B && rep.B <= lr + c.C2;
  rep.chain = -A <= rep.rhs && rep.rhs <= c.C3 + rep.B;
  rep.noncollapsed = rep.ratio >= rep.kappa;
  if (!rep.doubling)
    rep.iteration =
        doubling_iteration(volume_profile(grid, base, dyadic_radii(R, doubling_levels)), c.eta);
  return rep;
}

double diameter_bound(double V0, double kappa) {
  require(V0 > 0.0, ErrorCode::DomainError, "volume must be positive");
  require(kappa > 0.0, ErrorCode::DomainError, "kappa must be positive");
  return 2.0 * (std::floor(V0 / kappa) + 1.0);
}

}  // namespace entropy_lab
