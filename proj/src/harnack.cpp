#include "entropy_lab/harnack.hpp"

#include <cmath>
#include <limits>

namespace entropy_lab {

namespace {

HeatState at_tau_equals_t(const HeatState& s) {
  HeatState out = s;
  out.tau0 = 0.0;
  return out;
}

}  // namespace

ScalarField liyau_defect(const HeatState& state) {
  require(state.t > 0, ErrorCode::InvalidArgument, "t must be positive");
  const ScalarField f = f_of(at_tau_equals_t(state));
  const ScalarField lap = laplace_beltrami(f);
  const int n = f.grid()->dimension();
  ScalarField out(f.grid());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = 2.0 * state.t * lap[k] - n;
  return out;
}

ScalarField sharp_defect(const HeatState& state) {
  require(state.t > 0, ErrorCode::InvalidArgument, "t must be positive");
  return pointwise_w(at_tau_equals_t(state));
}

std::vector<bool> smooth_region(const ManifoldGrid& g, const BasePoint& base, double band) {
  const double h = g.kind() == GridKind::WarpedSurface || g.kind() == GridKind::EuclideanDisc
                       ? g.spacing(0)
                       : g.max_cell_width();
  std::vector<bool> keep(g.node_count(), true);
  for (int k = 0; k < g.node_count(); ++k)
    keep[k] = g.cut_locus_distance(k, base) > band * h;
  if (g.closed()) return keep;
  const int cells = static_cast<int>(std::ceil(band));
  const auto& d = g.descriptor();
  for (int k = 0; k < g.node_count(); ++k) {
    const int i = g.i_of(k);
    const int j = g.j_of(k);
    if (g.kind() == GridKind::EuclideanBox) {
      if (i < cells || j < cells || i >= g.n1() - cells || j >= g.n2() - cells) keep[k] = false;
    } else {
      if (!d.pole_at_start && i < cells) keep[k] = false;
      if (!d.pole_at_end && i >= g.n1() - cells) keep[k] = false;
    }
  }
  return keep;
}

VaradhanTable varadhan_profile(const KernelOracle& oracle, const GridPtr& grid,
                               const BasePoint& base, const std::vector<double>& ts,
                               double region_radius) {
  for (std::size_t i = 1; i < ts.size(); ++i)
    require(ts[i] < ts[i - 1], ErrorCode::InvalidArgument, "t list must be decreasing");
  VaradhanTable table;
  const ScalarField r = distance_field(grid, base);
  table.r2 = r * r;
  const auto region = smooth_region(*grid, base);
  for (double t : ts) {
    const ScalarField H = kernel(oracle, grid, base, t);
    ScalarField v(grid);
    double worst = 0.0, where = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      require(H[k] > 0, ErrorCode::LogDomain, "kernel value must be positive");
      v[k] = -4.0 * t * std::log(H[k]);
      if (!region[k] || r[k] > region_radius) continue;
      const double e = std::abs(v[k] - table.r2[k]);
      if (e > worst) {
        worst = e;
        where = r[k];
      }
    }
    if (!table.max_error.empty() && worst >= table.max_error.back())
      table.monotone_decreasing = false;
    table.t.push_back(t);
    table.max_error.push_back(worst);
    table.argmax_r.push_back(where);
    table.scaled_log.push_back(std::move(v));
  }
  return table;
}

ScalarField laplacian_comparison(const GridPtr& grid, const BasePoint& base) {
  const ScalarField r = distance_field(grid, base);
  return laplace_beltrami(r * r);
}

ComparisonReport comparison_excess(const GridPtr& grid, const BasePoint& base) {
  const ScalarField lap = laplacian_comparison(grid, base);
  const auto region = smooth_region(*grid, base);
  const int n = grid->dimension();
  ComparisonReport rep;
  rep.max_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < lap.size(); ++k) {
    if (!region[k]) continue;
    rep.max_excess = std::max(rep.max_excess, lap[k] - 2.0 * n);
    ++rep.checked_nodes;
  }
  return rep;
}

std::vector<RigidityRow> rigidity_diagnostic(const std::vector<HeatState>& states, double cutoff) {
  std::vector<RigidityRow> rows;
  for (const auto& s : states) {
    const ScalarField hq = hessian_quadratic(f_of(at_tau_equals_t(s)), s.t);
    const ScalarField ly = liyau_defect(s);
    const double umax = s.u.max();
    RigidityRow row{s.t, 0.0, 0.0};
    for (std::size_t k = 0; k < hq.size(); ++k) {
      if (s.u[k] < cutoff * umax) continue;
      row.hessian_defect = std::max(row.hessian_defect, std::sqrt(hq[k]));
      row.trace_defect = std::max(row.trace_defect, std::abs(ly[k]));
    }
    rows.push_back(row);
  }
  return rows;
}

DefectOrdering compare_defects(const HeatState& state, double cutoff) {
  const ScalarField ly = liyau_defect(state);
  const ScalarField sh = sharp_defect(state);
  const double umax = state.u.max();
  DefectOrdering d;
  for (std::size_t k = 0; k < ly.size(); ++k) {
    if (state.u[k] < cutoff * umax) continue;
    if (ly[k] < sh[k]) ++d.liyau_below_sharp;
    if (sh[k] < ly[k]) ++d.sharp_below_liyau;
  }
  return d;
}

}  // namespace entropy_lab
