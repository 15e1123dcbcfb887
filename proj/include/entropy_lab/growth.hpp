#pragma once

// Volume growth of geodesic balls and its equivalence with entropy bounds:
// kernel entropy along a heat-kernel trajectory, volume noncollapsing from a
// lower bound on mu through a fixed cutoff test function, the dyadic
// doubling iteration, and the diameter bound.

#include <vector>

#include "entropy_lab/heat.hpp"

namespace entropy_lab {

struct VolumeProfile {
  int dimension = 2;
  BasePoint base;
  std::vector<double> radii;
  std::vector<double> volume;  // V_x(r)
  std::vector<double> area;    // A_x(r) = dV/dr
  /// Radii beyond the largest distance from the base were clamped to it.
  std::vector<bool> clamped;

  /// r A / V per radius; n on Euclidean space.
  std::vector<double> area_ratio() const;
};

/// Ball volumes by counting node volumes with a linear ramp of width h (the
/// spacing along the first axis, radial on warped grids) across the sphere
/// r = d(x, node); areas are shell differences (V(r + 2h) - V(r - 2h)) / 4h.
VolumeProfile volume_profile(const GridPtr& grid, const BasePoint& base,
                             const std::vector<double>& radii);

/// Profile with V(r) = c r^p and A = c p r^(p-1) at the given radii.
VolumeProfile power_profile(int dimension, double p, const std::vector<double>& radii,
                            double c = 1.0);

/// Radii R, R/2, ..., R/2^levels.
std::vector<double> dyadic_radii(double R, int levels);

/// Cutoff zeta(s) = 1 - 3 q^2 + 2 q^3, q = clamp(2 s - 1, 0, 1): 1 on
/// [0, 1/2], 0 on [1, inf), C^1.
double cutoff(double s);
double cutoff_slope(double s);

struct KernelEntropyRow {
  double t = 0.0;
  double dirichlet = 0.0;   // 4 t int |grad v|^2, v = sqrt(u)
  double entropy = 0.0;     // -int v^2 log v^2
  double constant = 0.0;    // -(n + (n/2) log(4 pi t))
  double W = 0.0;           // dirichlet + entropy + constant
  /// -log(max u (4 pi t)^{n/2}) - n: the lower bound through the peak of u.
  double lower_bound = 0.0;
  /// (1 / 3t) int r^2 u dv.
  double moment = 0.0;
  double log_volume = 0.0;  // log V_x(sqrt t)
  bool finite = true;
  /// dirichlet <= n/2 (Li-Yau integrated against the kernel).
  bool dirichlet_bound = true;
};

/// W(f, t) of fundamental-solution states split into its v = sqrt(u) terms.
/// The entropy scale of each state is its tau().
std::vector<KernelEntropyRow> kernel_entropy_bound(const GridPtr& grid, const BasePoint& base,
                                                   const std::vector<HeatState>& trajectory,
                                                   double tol = 1e-6);

struct DoublingReport {
  double eta = 0.0;
  double R = 0.0;
  /// Largest k with V(R / 2^j) <= eta^j V(R) for all j <= k.
  int chain_length = 0;
  /// First k where the chain fails, or 0 if it persists to the last radius.
  int broken_at = 0;
  bool persists = false;
  /// log2(V(R) / V(R / 2^k)) / k over the chain.
  double exponent = 0.0;
  /// log2(1 / eta); n log2 3 for eta = 3^-n.
  double exponent_bound = 0.0;
  /// The chain persists to the resolution floor, so V(r) <= C r^exponent_bound.
  bool anomalous = false;
};

/// Requires radii R, R/2, R/4, ... in that order.
DoublingReport doubling_iteration(const VolumeProfile& profile, double eta);

struct NoncollapseReport {
  int dimension = 2;
  double A = 0.0;
  double R = 0.0;
  double eta = 0.0;
  double C1 = 0.0, C2 = 0.0, C3 = 0.0;
  double B = 0.0;    // log-mass shift making int h^2 dv = 1
  double rhs = 0.0;  // 4 R^2 int |grad h|^2 - int (log h^2 + (n/2) log 4 pi R^2) h^2 dv
  double volume = 0.0, half_volume = 0.0;  // V_x(R), V_x(R/2)
  double ratio = 0.0;                      // V_x(R) / R^n
  double kappa = 0.0;
  bool doubling = false;    // V(R/2) >= eta V(R)
  bool bracket = false;     // log ratio + C1 <= B <= log ratio + C2
  bool chain = false;       // -A <= rhs <= C3 + B
  bool noncollapsed = false;  // ratio >= kappa
  DoublingReport iteration;   // filled when the doubling hypothesis fails
};

/// Evaluates the cutoff test function h^2 = e^{-B} (4 pi R^2)^{-n/2} zeta^2(r / R)
/// at tau = R^2 and the implied volume bound V_x(R) >= kappa R^n with
/// kappa = exp(-A - C3 - C2).
NoncollapseReport mu_lower_to_volume(const GridPtr& grid, const BasePoint& base, double A,
                                     double R, int doubling_levels = 4);

/// Constants of the noncollapsing argument for the fixed cutoff and eta = 3^-n.
struct NoncollapseConstants {
  double eta, C1, C2, C3;
};
NoncollapseConstants noncollapse_constants(int n);

/// 2 (floor(V0 / kappa) + 1).
double diameter_bound(double V0, double kappa);

}  // namespace entropy_lab
