#ifndef ENTROPY_LAB_H
#define ENTROPY_LAB_H

/* C interface to the entropy lab: model grids, heat flow, the W functional,
 * mu(tau), the diameter bound and the experiment runner. Every call returns
 * an el_status; on failure el_last_error() describes the error of the
 * calling thread. Handles are opaque and owned by the caller. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define EL_API __declspec(dllexport)
#else
#define EL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum el_status {
  EL_OK = 0,
  EL_INVALID_ARGUMENT = 1,
  EL_INVALID_METRIC = 2,
  EL_POLE_MISMATCH = 3,
  EL_INVALID_TAU = 4,
  EL_UNSUPPORTED_BASE = 5,
  EL_STEP_FAILURE = 6,
  EL_TRUNCATION_ERROR = 7,
  EL_UNDER_RESOLVED = 8,
  EL_LOG_DOMAIN = 9,
  EL_CONSTRAINT_VIOLATED = 10,
  EL_DOMAIN_ERROR = 11,
  EL_UNSUPPORTED_GRID = 12,
  EL_DEGENERATE_LEVEL = 13,
  EL_CONFIG_ERROR = 14,
  EL_ASSERTION_FAILED = 15,
  EL_NULL_ARGUMENT = 16,
  EL_INTERNAL = 99
} el_status;

typedef struct el_grid el_grid;
typedef struct el_field el_field;
typedef struct el_report el_report;

EL_API const char* el_version(void);
EL_API const char* el_status_name(el_status status);
/* Message of the last failed call on this thread; "" after a success. */
EL_API const char* el_last_error(void);

/* kind: "circle", "torus", "sphere", "box" or "disc". length1 / length2 are
 * the circle length or the torus / box sides, radius the disc radius;
 * unused parameters are ignored. n2 is ignored for the circle. */
EL_API el_status el_grid_create(const char* kind, double length1, double length2, double radius,
                                int n1, int n2, el_grid** out);
EL_API void el_grid_destroy(el_grid* grid);
EL_API el_status el_grid_node_count(const el_grid* grid, size_t* out);
EL_API el_status el_grid_dimension(const el_grid* grid, int* out);
EL_API el_status el_grid_total_volume(const el_grid* grid, double* out);

/* Fundamental solution at time t0 centred at the middle of the grid (the
 * pole of the sphere). */
EL_API el_status el_heat_kernel_state(const el_grid* grid, double t0, el_field** out);
/* Crank-Nicolson steps of size dt until t_end. */
EL_API el_status el_heat_advance(const el_grid* grid, el_field* state, double t_end, double dt);
EL_API void el_field_destroy(el_field* field);
EL_API el_status el_field_time(const el_field* field, double* out);
/* Copies min(capacity, node count) values into out. */
EL_API el_status el_field_values(const el_field* field, double* out, size_t capacity);

EL_API el_status el_w_functional(const el_field* state, double* out);
/* mu(tau) by the multistart minimizer. */
EL_API el_status el_mu(const el_grid* grid, double tau, double* out);
EL_API el_status el_diameter_bound(double volume, double kappa, double* out);

EL_API size_t el_experiment_count(void);
/* NULL when index is out of range. */
EL_API const char* el_experiment_name(size_t index);
EL_API const char* el_experiment_anchor(size_t index);

/* Runs an experiment. config_path, out_dir and seed may be NULL. The report
 * is created whenever out is non-NULL, also for configuration errors. Returns
 * EL_OK when every assertion passed, EL_ASSERTION_FAILED or EL_CONFIG_ERROR
 * otherwise. */
EL_API el_status el_run(const char* experiment, const char* config_path, const char* out_dir,
                        const uint64_t* seed, int parallel, el_report** out);
EL_API void el_report_destroy(el_report* report);
/* 0 pass, 1 assertion failure, 2 configuration error. */
EL_API int el_report_exit_code(const el_report* report);
EL_API const char* el_report_message(const el_report* report);
EL_API const char* el_report_output_dir(const el_report* report);
EL_API size_t el_report_failure_count(const el_report* report);
EL_API const char* el_report_failure(const el_report* report, size_t index);

#ifdef __cplusplus
}
#endif

#endif
