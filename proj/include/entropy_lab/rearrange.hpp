#pragma once

// Spherical symmetrization of a nonnegative compactly supported field on a
// Euclidean box: distribution function, the equimeasurable radial
// nonincreasing rearrangement g on a ball of the same volume, and the
// layer-cake, Dirichlet and co-area comparisons between the two.
//
// The field is read as its piecewise-linear interpolant on the triangulated
// node lattice. Its Dirichlet energy is exactly the grid energy
// sum_e w_e (delta phi)^2, and volumes, level lengths and integrals over
// level sets are evaluated exactly per triangle.

#include <cstdint>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "entropy_lab/geometry.hpp"

namespace entropy_lab {

/// Piecewise-linear interpolant of a field on the box triangulation.
class Interpolant {
 public:
  explicit Interpolant(const ScalarField& phi);

  /// Vol{phi >= t}.
  double volume_at_least(double t) const;
  /// Vol{phi > t}.
  double volume_above(double t) const;
  /// int lambda(phi) dv.
  double integrate(const std::function<double(double)>& lambda) const;
  /// int |grad phi|^2 dv.
  double dirichlet() const;
  double max_gradient() const { return grad_max_; }
  double max_value() const { return max_; }

  struct Level {
    double length = 0.0;        // A(Gamma_t)
    double grad_int = 0.0;      // int_{Gamma_t} |grad phi|
    double inv_grad_int = 0.0;  // int_{Gamma_t} 1 / |grad phi| = -F'(t)
    double min_gradient = 0.0;  // over triangles the level crosses
    int triangles = 0;
  };
  Level level(double t) const;

 private:
  struct Tri {
    double a, b, c;  // sorted vertex values
    double area;
    double grad;
  };
  std::vector<Tri> tris_;
  double grad_max_ = 0.0;
  double max_ = 0.0;
};

struct LevelProfile {
  GridPtr grid;
  std::shared_ptr<const Interpolant> interpolant;
  /// Thresholds uniform in node measure over the support, descending;
  /// thresholds[0] = max phi.
  std::vector<double> thresholds;
  /// F(t_k) = Vol{phi >= t_k}.
  std::vector<double> F;
  double support_volume = 0.0;  // Vol{phi > 0}
  double max_value = 0.0;
};

LevelProfile distribution(const ScalarField& phi, int K = 256);

/// Radial nonincreasing function on a Euclidean ball, piecewise linear in the
/// radius between knots and zero at the rim.
struct RadialFunction {
  int dimension = 2;
  double R = 0.0;
  std::vector<double> rho;    // ascending, rho.back() = R
  std::vector<double> value;  // nonincreasing, value.back() = 0

  double operator()(double r) const;
  /// Vol{g >= t}.
  double volume_at_least(double t) const;
  /// int lambda(g) over the ball.
  double integrate(const std::function<double(double)>& lambda) const;
  /// int |grad g|^2 over the ball.
  double dirichlet() const;
};

double ball_volume(int n, double r);
double sphere_area(int n, double r);

/// g with Vol{g >= t_k} = F(t_k) at every threshold and Vol(B(R)) = Vol{phi > 0}.
RadialFunction radial_rearrangement(const LevelProfile& profile);

/// (int_0^inf lambda'(s) F(s) ds by the trapezoid rule over the thresholds,
/// int lambda(phi) dv).
std::pair<double, double> layer_cake(const ScalarField& phi,
                                     const std::function<double(double)>& lambda, int K = 256);

/// (int |grad phi|^2 dv, int |grad g|^2 over the ball).
std::pair<double, double> dirichlet_compare(const ScalarField& phi, int K = 256);

struct CoareaLevel {
  double t = 0.0;
  double area = 0.0;          // A(Gamma_t)
  double grad_int = 0.0;      // int_{Gamma_t} |grad phi|
  double inv_grad_int = 0.0;  // int_{Gamma_t} 1 / |grad phi|
  double area_bar = 0.0;      // the same three on the level sphere of g
  double grad_int_bar = 0.0;
  double inv_grad_int_bar = 0.0;
  bool holder = false;        // area^2 <= grad_int * inv_grad_int
  bool comparison = false;    // grad_int >= grad_int_bar
};

struct CoareaOptions {
  double tol = 1e-9;  // relative slack in both inequalities
  /// A level is degenerate when |grad phi| on a triangle it crosses drops
  /// below floor * max |grad phi|.
  double floor = 1e-3;
};

/// Level-set integrals of phi at t and of its rearrangement, where
/// |grad g| = A(bar Gamma_t) / (-F'(t)) on the level sphere. Throws
/// DegenerateLevel for an empty or critical level.
CoareaLevel coarea_chain(const ScalarField& phi, double t, const CoareaOptions& opts = {});

struct CoareaSweep {
  std::vector<CoareaLevel> levels;
  std::vector<double> degenerate;  // skipped thresholds
  bool all_hold = true;
};

CoareaSweep coarea_sweep(const LevelProfile& profile, const CoareaOptions& opts = {});

/// int 2 |grad phi|^2 - phi^2 log phi^2 - ((n/2) log 2 pi + n) phi^2 dv for
/// phi scaled to unit L^2 norm.
double symmetrization_functional(const ScalarField& phi);
/// The same functional of g on the ball after scaling g by `scale`.
double symmetrization_functional(const RadialFunction& g, double scale);

struct SymmetrizationReport {
  double max_equimeasure_gap = 0.0;  // over thresholds, in volume units
  double cell_volume = 0.0;
  double layer_cake_relerr = 0.0;    // lambda(s) = s^2
  double l2_phi = 0.0, l2_g = 0.0;
  double entropy_phi = 0.0, entropy_g = 0.0;  // int phi^2 log phi^2
  double energy_phi = 0.0, energy_g = 0.0;
  double functional_phi = 0.0, functional_g = 0.0;
  CoareaSweep coarea;
};

SymmetrizationReport symmetrize(const ScalarField& phi, int K = 256);

/// Sum of 1 to 4 bumps a (1 - |x - c|^2 / s^2)^3_+ with centres and radii
/// drawn so the support stays inside the middle of the box.
ScalarField random_bump_field(const GridPtr& grid, std::uint64_t seed);

}  // namespace entropy_lab
