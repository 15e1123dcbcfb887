#include "entropy_lab/entropy_lab.h"

#include <exception>
#include <new>
#include <string>

#include "entropy_lab/entropy.hpp"
#include "entropy_lab/experiments.hpp"
#include "entropy_lab/growth.hpp"
#include "entropy_lab/logsob.hpp"
#include "entropy_lab/output.hpp"

struct el_grid {
  entropy_lab::GridPtr grid;
};

struct el_field {
  entropy_lab::HeatState state;
};

struct el_report {
  entropy_lab::RunOutcome outcome;
  std::string out;
};

namespace {

thread_local std::string g_error;

el_status ok() {
  g_error.clear();
  return EL_OK;
}

el_status fail(el_status s, const std::string& what) {
  g_error = what;
  return s;
}

// Error codes share their numbering with el_status.
template <class F>
el_status guard(F&& f) {
  try {
    f();
    return ok();
  } catch (const entropy_lab::Error& e) {
    return fail(static_cast<el_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(EL_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(EL_INTERNAL, e.what());
  }
}

#define EL_REQUIRE(ptr) \
  if (!(ptr)) return fail(EL_NULL_ARGUMENT, #ptr " must not be NULL")

}  // namespace

extern "C" {

const char* el_version(void) { return entropy_lab::version(); }

const char* el_status_name(el_status status) {
  switch (status) {
    case EL_OK: return "ok";
    case EL_ASSERTION_FAILED: return "AssertionFailed";
    case EL_NULL_ARGUMENT: return "NullArgument";
    case EL_INTERNAL: return "Internal";
    default:
      if (status >= EL_INVALID_ARGUMENT && status <= EL_CONFIG_ERROR)
        return entropy_lab::to_string(static_cast<entropy_lab::ErrorCode>(status));
      return "unknown";
  }
}

const char* el_last_error(void) { return g_error.c_str(); }

el_status el_grid_create(const char* kind, double length1, double length2, double radius, int n1,
                         int n2, el_grid** out) {
  EL_REQUIRE(kind);
  EL_REQUIRE(out);
  *out = nullptr;
  return guard([&] {
    using entropy_lab::ManifoldDescriptor;
    const std::string k = kind;
    ManifoldDescriptor d;
    if (k == "circle") d = ManifoldDescriptor::circle(length1), n2 = 1;
    else if (k == "torus") d = ManifoldDescriptor::torus(length1, length2);
    else if (k == "sphere") d = ManifoldDescriptor::sphere();
    else if (k == "box") d = ManifoldDescriptor::box(length1, length2);
    else if (k == "disc") d = ManifoldDescriptor::disc(radius);
    else throw entropy_lab::Error(entropy_lab::ErrorCode::InvalidArgument, "unknown grid kind " + k);
    *out = new el_grid{entropy_lab::build_grid(d, {n1, n2})};
  });
}

void el_grid_destroy(el_grid* grid) { delete grid; }

el_status el_grid_node_count(const el_grid* grid, size_t* out) {
  EL_REQUIRE(grid);
  EL_REQUIRE(out);
  *out = static_cast<size_t>(grid->grid->node_count());
  return ok();
}

el_status el_grid_dimension(const el_grid* grid, int* out) {
  EL_REQUIRE(grid);
  EL_REQUIRE(out);
  *out = grid->grid->dimension();
  return ok();
}

el_status el_grid_total_volume(const el_grid* grid, double* out) {
  EL_REQUIRE(grid);
  EL_REQUIRE(out);
  *out = grid->grid->total_volume();
  return ok();
}

el_status el_heat_kernel_state(const el_grid* grid, double t0, el_field** out) {
  EL_REQUIRE(grid);
  EL_REQUIRE(out);
  *out = nullptr;
  return guard([&] {
    const auto base = entropy_lab::default_base(*grid->grid);
    *out = new el_field{entropy_lab::delta_init(grid->grid, base, t0)};
  });
}

el_status el_heat_advance(const el_grid* grid, el_field* state, double t_end, double dt) {
  EL_REQUIRE(grid);
  EL_REQUIRE(state);
  return guard([&] {
    entropy_lab::require(state->state.u.grid() == grid->grid, entropy_lab::ErrorCode::InvalidArgument,
                         "state lives on another grid");
    entropy_lab::HeatSolver solver(grid->grid);
    state->state = solver.advance(state->state, t_end, dt);
  });
}

void el_field_destroy(el_field* field) { delete field; }

el_status el_field_time(const el_field* field, double* out) {
  EL_REQUIRE(field);
  EL_REQUIRE(out);
  *out = field->state.t;
  return ok();
}

el_status el_field_values(const el_field* field, double* out, size_t capacity) {
  EL_REQUIRE(field);
  EL_REQUIRE(out);
  const auto v = field->state.u.values();
  for (size_t k = 0; k < v.size() && k < capacity; ++k) out[k] = v[k];
  return ok();
}

el_status el_w_functional(const el_field* state, double* out) {
  EL_REQUIRE(state);
  EL_REQUIRE(out);
  return guard([&] { *out = entropy_lab::w_functional(state->state); });
}

el_status el_mu(const el_grid* grid, double tau, double* out) {
  EL_REQUIRE(grid);
  EL_REQUIRE(out);
  return guard([&] { *out = entropy_lab::minimize_mu_multistart(grid->grid, tau, nullptr).mu; });
}

el_status el_diameter_bound(double volume, double kappa, double* out) {
  EL_REQUIRE(out);
  return guard([&] { *out = entropy_lab::diameter_bound(volume, kappa); });
}

size_t el_experiment_count(void) { return entropy_lab::experiment_list().size(); }

const char* el_experiment_name(size_t index) {
  const auto& l = entropy_lab::experiment_list();
  return index < l.size() ? l[index].name.c_str() : nullptr;
}

const char* el_experiment_anchor(size_t index) {
  const auto& l = entropy_lab::experiment_list();
  return index < l.size() ? l[index].anchor.c_str() : nullptr;
}

el_status el_run(const char* experiment, const char* config_path, const char* out_dir,
                 const uint64_t* seed, int parallel, el_report** out) {
  EL_REQUIRE(experiment);
  if (out) *out = nullptr;
  entropy_lab::RunOutcome outcome;
  const el_status s = guard([&] {
    entropy_lab::Config config;
    if (config_path) {
      try {
        config = entropy_lab::Config::load(config_path);
      } catch (const entropy_lab::Error& e) {
        outcome.exit_code = 2;
        outcome.message = e.what();
        return;
      }
    }
    entropy_lab::RunOptions opts;
    if (out_dir) opts.out = out_dir;
    if (seed) opts.seed = *seed;
    opts.parallel = parallel != 0;
    outcome = entropy_lab::run_experiment(experiment, config, opts);
  });
  if (s != EL_OK) return s;
  if (out) *out = new el_report{outcome, outcome.out.string()};
  if (outcome.exit_code == 2) return fail(EL_CONFIG_ERROR, outcome.message);
  if (outcome.exit_code == 1) return fail(EL_ASSERTION_FAILED, outcome.message);
  return ok();
}

void el_report_destroy(el_report* report) { delete report; }

int el_report_exit_code(const el_report* report) { return report ? report->outcome.exit_code : 2; }

const char* el_report_message(const el_report* report) {
  return report ? report->outcome.message.c_str() : "";
}

const char* el_report_output_dir(const el_report* report) { return report ? report->out.c_str() : ""; }

size_t el_report_failure_count(const el_report* report) {
  return report ? report->outcome.failures.size() : 0;
}

const char* el_report_failure(const el_report* report, size_t index) {
  if (!report || index >= report->outcome.failures.size()) return nullptr;
  return report->outcome.failures[index].c_str();
}

}  // extern "C"
