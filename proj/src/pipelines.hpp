#pragma once

// Internal: resolved experiment settings and the per-experiment pipelines.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "entropy_lab/geometry.hpp"
#include "entropy_lab/output.hpp"

namespace entropy_lab::detail {

struct CaseSpec {
  std::string kind;  // circle, torus, sphere, box, disc
  ManifoldDescriptor desc;
  Resolution res;
  double t0 = 0.0;
  double t_end = 0.0;
  double dt = 0.0;
  std::vector<double> taus;
  GridPtr grid;  // built during validation

  std::string label() const;
};

struct Settings {
  std::vector<CaseSpec> cases;
  std::map<std::string, double> tolerances;
  std::uint64_t seed = 0;

  double tol(const std::string& name) const { return tolerances.at(name); }
};

using Pipeline = void (*)(const Settings&, Artifacts&);

struct Definition {
  std::string name;
  std::string anchor;
  std::vector<CaseSpec> supported;    // per-kind defaults
  std::vector<std::string> defaults;  // kinds run when manifold.kind is absent
  std::vector<std::string> keys;      // accepted time.* and tau.list keys
  std::vector<std::pair<std::string, double>> tolerances;
  Pipeline run = nullptr;
};

/// The ten experiment definitions in listing order.
const std::vector<Definition>& definitions();

void run_monotonicity(const Settings& s, Artifacts& out);
void run_pointwise(const Settings& s, Artifacts& out);
void run_dissipation_match(const Settings& s, Artifacts& out);
void run_liyau(const Settings& s, Artifacts& out);
void run_varadhan(const Settings& s, Artifacts& out);
void run_mu_curve(const Settings& s, Artifacts& out);
void run_lsi_euclidean(const Settings& s, Artifacts& out);
void run_symmetrize(const Settings& s, Artifacts& out);
void run_growth(const Settings& s, Artifacts& out);
void run_noncollapse(const Settings& s, Artifacts& out);

}  // namespace entropy_lab::detail
