#pragma once

// Positive unit-mass heat flow on model grids and exact spectral heat
// kernels on the circle, the flat torus and the round sphere.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "entropy_lab/geometry.hpp"

namespace entropy_lab {

/// A positive solution u of the heat equation at time t. The entropy scale
/// is tau = t + tau0.
struct HeatState {
  ScalarField u;
  double t = 0.0;
  double tau0 = 0.0;
  /// |mass - 1| removed by the last renormalization.
  double last_renormalization = 0.0;

  double tau() const { return t + tau0; }
};

struct KernelOracle {
  enum class Kind { CircleTheta, TorusTheta, SphereLegendre };

  Kind kind = Kind::CircleTheta;
  /// Largest Legendre degree the sphere series may use.
  int max_degree = 4000;
  /// Bound on the discarded series tail relative to the smallest kernel value.
  double tolerance = 1e-20;

  /// Oracle matching the grid, if one exists (circle, torus, round sphere).
  static std::optional<KernelOracle> for_grid(const ManifoldGrid& grid);
};

/// Periodic heat kernel on a circle of length L at offset d. The image sum
/// and the Fourier series are the two dual theta representations; `fourier`
/// forces the latter.
double circle_kernel(double d, double t, double length, bool fourier = false);

/// Legendre degree at which the sphere series tail drops below `tolerance`
/// times the antipodal kernel value.
int required_sphere_degree(double t, double tolerance);

/// Heat kernel of the unit sphere at geodesic distances r. The series is
/// summed with enough decimal digits (100 to 800) that the exponentially
/// small antipodal values keep full relative accuracy.
std::vector<double> sphere_kernel(const std::vector<double>& r, double t, int max_degree,
                                  double tolerance);

ScalarField kernel(const KernelOracle& oracle, const GridPtr& grid, const BasePoint& base,
                   double t);

/// Smallest admissible fundamental-solution start time, 10 h^2.
double resolution_floor(const ManifoldGrid& grid);

/// Fundamental-solution state at t0 from the spectral oracle when the grid
/// has one, otherwise from a renormalized Gaussian bump.
HeatState delta_init(const GridPtr& grid, const BasePoint& base, double t0, double tau0 = 0.0);

struct HeatOptions {
  double max_dt = 0.5;
  int max_halvings = 8;
};

/// Crank-Nicolson stepping of the discrete Laplacian. The symmetric system
/// (V - dt/2 K) x = (V + dt/2 K) u is an M-matrix and is factored once per
/// step size by sparse LDL^T, which keeps exponentially small tails positive.
class HeatSolver {
 public:
  explicit HeatSolver(GridPtr grid, HeatOptions opts = {});
  ~HeatSolver();
  HeatSolver(const HeatSolver&) = delete;
  HeatSolver& operator=(const HeatSolver&) = delete;

  const GridPtr& grid() const { return grid_; }
  const HeatOptions& options() const { return opts_; }

  HeatState step(const HeatState& state, double dt) const;
  /// Steps of size dt until t_end (the last step is shortened to land on it).
  HeatState advance(const HeatState& state, double t_end, double dt) const;

 private:
  struct Factor;
  const Factor& factor(double dt) const;
  bool substep(std::vector<double>& u, double dt, double& drift) const;

  GridPtr grid_;
  HeatOptions opts_;
  mutable std::mutex mutex_;
  mutable std::map<double, std::unique_ptr<Factor>> cache_;
};

}  // namespace entropy_lab
