#pragma once

// The entropy invariant mu(tau) = inf W over unit-mass densities, in the
// sqrt-density variable psi = sqrt(u):
//
//     W(psi, tau) = int 4 tau |grad psi|^2 - psi^2 log psi^2
//                   - ((n/2) log(4 pi tau) + n) psi^2 dv,   int psi^2 = 1.
//
// Critical points satisfy -4 tau Lap psi - psi log psi^2 = lambda psi with
// lambda = mu + n + (n/2) log(4 pi tau).

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "entropy_lab/geometry.hpp"

namespace entropy_lab {

double w_of_psi(const ScalarField& psi, double tau);

/// The same functional evaluated in the metric g / (2 tau) with psi rescaled
/// to unit L^2 norm there and the constant (n/2) log(2 pi) + n.
double w_of_psi_rescaled(const ScalarField& psi, double tau);

/// Functional gradient (volume-weighted) of w_of_psi, ignoring the constraint.
ScalarField w_gradient(const ScalarField& psi, double tau);

/// Both sides of int F(lambda phi) / int (lambda phi)^2 = int F(phi) / int phi^2
/// - log lambda^2, where F is the integrand of w_of_psi.
std::pair<double, double> scaling_identity_check(const ScalarField& phi, double lambda,
                                                 double tau);

struct MuOptions {
  double tol = 1e-6;          // max-norm Euler-Lagrange residual
  int max_iterations = 4000;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 50;
  bool multistart = true;     // Gaussian, constant and warm starts
  int probe_iterations = 150; // per start before the best one is finished
  /// Mass shift sigma of the preconditioner sigma V + 8 tau S; 0 picks
  /// 2 + 2 |(n/2) log(4 pi tau) + n|.
  double preconditioner_shift = 0.0;
  /// Newton polishing once the residual is below newton_start.
  int newton_steps = 8;
  double newton_start = 1e-3;
  /// Prints one line per iteration to stderr when set.
  bool trace = false;
};

struct MuResult {
  ScalarField psi;
  double mu = 0.0;
  double tau = 0.0;
  double el_residual = 0.0;
  /// lambda read off the Euler-Lagrange equation at the peak of psi.
  double multiplier = 0.0;
  /// |multiplier - (mu + n + (n/2) log(4 pi tau))|.
  double multiplier_gap = 0.0;
  int iterations = 0;
  bool converged = false;
  double initial_value = 0.0;
  /// W after the start and after every accepted step.
  std::vector<double> history;
  std::string start;
};

/// Centre of the domain: the pole of a warped surface, the middle otherwise.
BasePoint default_base(const ManifoldGrid& grid);

/// psi^2 = normalized Gaussian of variance 2 tau around the base point.
ScalarField gaussian_psi(const GridPtr& grid, const BasePoint& base, double tau);
ScalarField constant_psi(const GridPtr& grid);

/// Preconditioned Riemannian gradient descent with Armijo backtracking from
/// one starting field.
MuResult minimize_mu(const GridPtr& grid, double tau, const ScalarField& init,
                     const MuOptions& opts = {});

/// Best of the Gaussian, constant and (when given) warm starts.
MuResult minimize_mu_multistart(const GridPtr& grid, double tau, const ScalarField* warm,
                                const MuOptions& opts = {});

struct MuCurve {
  std::vector<MuResult> entries;
  bool monotone = true;      // mu(tau_i) >= mu(tau_j) - 1e-4 over converged entries
  bool nonpositive = true;   // every mu <= 1e-3
  /// Unextrapolated values, filled by mu_curve_extrapolated only.
  std::vector<double> coarse_mu;
  std::vector<double> fine_mu;
};

/// mu over an ascending tau list, warm-started from the previous minimizer.
MuCurve mu_curve(const GridPtr& grid, const std::vector<double>& taus, const MuOptions& opts = {});

/// mu_curve on two grids with spacing h and h/2, combined as (4 mu_{h/2} - mu_h) / 3
/// to cancel the O(h^2 / tau) discretization bias. Entries hold the fine minimizers.
MuCurve mu_curve_extrapolated(const GridPtr& coarse, const GridPtr& fine,
                              const std::vector<double>& taus, const MuOptions& opts = {});

/// Log-Sobolev integral int (|grad f|^2 / 2 + f - n) e^{-f} / (2 pi)^{n/2} dv.
/// The sample must satisfy the unit-mass normalization.
double euclidean_lsi(const ScalarField& f);

/// Shifts f by a constant so that e^{-f} / (2 pi)^{n/2} has unit mass.
ScalarField normalize_lsi_sample(const ScalarField& f);

struct LsiValue {
  double coarse = 0.0;
  double fine = 0.0;
  double extrapolated = 0.0;  // (4 fine - coarse) / 3
};

/// euclidean_lsi of the normalized sample f(x, y) on two box grids with
/// spacing h and h/2, extrapolated to cancel the O(h^2) quadrature bias.
LsiValue euclidean_lsi_check(const GridPtr& coarse, const GridPtr& fine,
                             const std::function<double(double, double)>& f);

}  // namespace entropy_lab
