#pragma once

// Pointwise Harnack-type defects of fundamental solutions, the small-time
// distance limit of the heat kernel and Laplacian comparison for r^2.

#include <vector>

#include "entropy_lab/entropy.hpp"

namespace entropy_lab {

/// t (2 Lap f) - n with f = -log u - (n/2) log(4 pi t).
ScalarField liyau_defect(const HeatState& state);

/// t (2 Lap f - |grad f|^2) + f - n, i.e. pointwise_w at tau = t.
ScalarField sharp_defect(const HeatState& state);

/// Nodes at least `band` cells away from the cut locus of `base` and from a
/// Neumann rim.
std::vector<bool> smooth_region(const ManifoldGrid& grid, const BasePoint& base, double band = 4.0);

struct VaradhanTable {
  std::vector<double> t;
  /// max over the region of |-4 t log H - r^2| for each t.
  std::vector<double> max_error;
  /// r at which the maximum is attained.
  std::vector<double> argmax_r;
  ScalarField r2;
  std::vector<ScalarField> scaled_log;  // -4 t log H
  bool monotone_decreasing = true;
};

/// Evaluates the kernel oracle at each t and compares -4 t log H with r^2 on
/// nodes with r <= region_radius inside the smooth region.
VaradhanTable varadhan_profile(const KernelOracle& oracle, const GridPtr& grid,
                               const BasePoint& base, const std::vector<double>& ts,
                               double region_radius);

/// Lap (r^2) for the distance from `base`.
ScalarField laplacian_comparison(const GridPtr& grid, const BasePoint& base);

struct ComparisonReport {
  double max_excess = 0.0;  // max over the smooth region of Lap r^2 - 2n
  int checked_nodes = 0;
};

ComparisonReport comparison_excess(const GridPtr& grid, const BasePoint& base);

struct RigidityRow {
  double t = 0.0;
  double hessian_defect = 0.0;  // sup |Hess f - g/(2t)|
  double trace_defect = 0.0;    // sup |2 t Lap f - n|
};

/// Sup norms over nodes with u >= cutoff * max u.
std::vector<RigidityRow> rigidity_diagnostic(const std::vector<HeatState>& states,
                                             double cutoff = 1e-3);

struct DefectOrdering {
  int liyau_below_sharp = 0;  // nodes with liyau_defect < sharp_defect
  int sharp_below_liyau = 0;
};

/// Counts over nodes with u >= cutoff * max u.
DefectOrdering compare_defects(const HeatState& state, double cutoff = 1e-3);

}  // namespace entropy_lab
