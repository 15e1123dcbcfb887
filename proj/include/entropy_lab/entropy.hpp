#pragma once

// The W-entropy of a positive heat solution, its pointwise density, the
// dissipation formula and the evolution identities behind it.
//
// Writing u = e^{-f} / (4 pi tau)^{n/2} with unit mass,
//
//     W = int (tau |grad f|^2 + f - n) u dv.
//
// The Dirichlet part is evaluated as 4 tau int |grad sqrt(u)|^2 dv on grid
// edges, so W and its sqrt(u) form agree to roundoff.

#include <utility>

#include "entropy_lab/heat.hpp"

namespace entropy_lab {

/// Nodes with u below this value are left out of f-dependent integrands.
inline constexpr double kTailFloor = 1e-300;

/// f = -log u - (n/2) log(4 pi tau).
ScalarField f_of(const HeatState& state);

struct WParts {
  double W = 0.0;
  double dirichlet_term = 0.0;  // int tau |grad f|^2 u dv
  double nash_term = 0.0;       // int f u dv
  double excluded_mass = 0.0;   // mass on nodes below kTailFloor
};

WParts w_parts(const HeatState& state);
double w_functional(const HeatState& state);

/// 4 tau int |grad v|^2 - int v^2 log v^2 - n - (n/2) log(4 pi tau), v = sqrt(u).
double w_sqrt_form(const HeatState& state);

/// tau (2 Lap f - |grad f|^2) + f - n.
ScalarField pointwise_w(const HeatState& state);

/// -2 tau sum over boundary faces of II((grad f)^T, (grad f)^T) dA; 0 on
/// closed grids and on flat faces.
double boundary_term(const HeatState& state);

struct EntropyReport {
  double t = 0.0;
  double tau = 0.0;
  double W = 0.0;
  double nash_term = 0.0;
  double dirichlet_term = 0.0;
  /// -int 2 tau (|Hess f - g/(2 tau)|^2 + Ric(grad f, grad f)) u dv.
  double predicted_dWdt = 0.0;
  /// Centered difference of W, Richardson-extrapolated over dt and dt/2.
  double measured_dWdt = 0.0;
  double boundary_term = 0.0;
  /// |measured - (predicted + boundary)| / |predicted + boundary|.
  double match_relerr = 0.0;
  double excluded_mass = 0.0;
  /// predicted_dWdt <= 0, expected whenever Ric >= 0.
  bool predicted_nonpositive = true;
};

/// Entropy report at the midpoint t + dt of a short forward run from `state`
/// (two steps of dt and three of dt/2). The returned state sits at t + dt.
std::pair<EntropyReport, HeatState> dissipation(const HeatState& state, const HeatSolver& solver,
                                                double dt);

/// Report without the time derivative (measured_dWdt = 0, match_relerr = 0).
EntropyReport snapshot(const HeatState& state);

struct LemmaResiduals {
  double w_identity = 0.0;  // max |residual| of the w = 2 Lap f - |grad f|^2 evolution
  double W_identity = 0.0;  // max |residual| of the pointwise-W evolution
};

/// Discrete residuals at s1 of the evolution identities, from three states
/// equally spaced in time. Nodes with u < cutoff * max u are ignored.
LemmaResiduals lemma_residuals(const HeatState& s0, const HeatState& s1, const HeatState& s2,
                               double cutoff = 0.0);

}  // namespace entropy_lab
