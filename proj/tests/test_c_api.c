/* Exercises the C interface from C. */

#include <math.h>
#include <stdint.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "entropy_lab/entropy_lab.h"

static int failures = 0;

#define EXPECT(cond)                                                     \
  do {                                                                   \
    if (!(cond)) {                                                       \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                        \
    }                                                                    \
  } while (0)

static void test_status_and_version(void) {
  EXPECT(strcmp(el_version(), "") != 0);
  EXPECT(strcmp(el_status_name(EL_OK), "ok") == 0);
  EXPECT(strcmp(el_status_name(EL_CONFIG_ERROR), "ConfigError") == 0);
  EXPECT(strcmp(el_status_name(EL_INVALID_TAU), "InvalidTau") == 0);
}

static void test_grid(void) {
  el_grid* g = NULL;
  size_t n = 0;
  int dim = 0;
  double vol = 0.0;
  EXPECT(el_grid_create("sphere", 0, 0, 0, 128, 16, &g) == EL_OK);
  EXPECT(g != NULL);
  EXPECT(el_grid_node_count(g, &n) == EL_OK && n == 128 * 16);
  EXPECT(el_grid_dimension(g, &dim) == EL_OK && dim == 2);
  EXPECT(el_grid_total_volume(g, &vol) == EL_OK && fabs(vol - 4 * M_PI) < 1e-2);
  el_grid_destroy(g);

  g = NULL;
  EXPECT(el_grid_create("circle", 2 * M_PI, 0, 0, 64, 99, &g) == EL_OK);
  EXPECT(el_grid_node_count(g, &n) == EL_OK && n == 64);
  EXPECT(el_grid_dimension(g, &dim) == EL_OK && dim == 1);
  el_grid_destroy(g);

  g = (el_grid*)1;
  EXPECT(el_grid_create("klein", 1, 1, 1, 8, 8, &g) == EL_INVALID_ARGUMENT);
  EXPECT(g == NULL);
  EXPECT(strstr(el_last_error(), "klein") != NULL);
  EXPECT(el_grid_create("box", -1, 1, 0, 8, 8, &g) != EL_OK);
  EXPECT(el_grid_create(NULL, 1, 1, 0, 8, 8, &g) == EL_NULL_ARGUMENT);
  EXPECT(el_grid_node_count(NULL, &n) == EL_NULL_ARGUMENT);
  el_grid_destroy(NULL);
}

static void test_heat_and_entropy(void) {
  el_grid* g = NULL;
  el_field* f = NULL;
  double w0 = 0.0, w1 = 0.0, t = 0.0, mass = 0.0;
  size_t n = 0;
  EXPECT(el_grid_create("torus", 2 * M_PI, 2 * M_PI, 0, 64, 64, &g) == EL_OK);
  EXPECT(el_heat_kernel_state(g, 0.5, &f) == EL_OK);
  EXPECT(el_w_functional(f, &w0) == EL_OK);
  EXPECT(el_heat_advance(g, f, 0.7, 0.02) == EL_OK);
  EXPECT(el_field_time(f, &t) == EL_OK && fabs(t - 0.7) < 1e-12);
  EXPECT(el_w_functional(f, &w1) == EL_OK);
  EXPECT(w1 <= w0 + 1e-8);

  EXPECT(el_grid_node_count(g, &n) == EL_OK);
  double* u = malloc(n * sizeof(double));
  double vol = 0.0;
  EXPECT(el_grid_total_volume(g, &vol) == EL_OK);
  EXPECT(el_field_values(f, u, n) == EL_OK);
  for (size_t k = 0; k < n; ++k) {
    EXPECT(u[k] > 0.0);
    mass += u[k] * vol / (double)n;
  }
  EXPECT(fabs(mass - 1.0) < 1e-6);
  free(u);

  EXPECT(el_heat_advance(g, f, 0.8, -0.1) != EL_OK);
  EXPECT(strlen(el_last_error()) > 0);
  EXPECT(el_heat_kernel_state(g, -1.0, &f) != EL_OK);
  el_field_destroy(f);
  el_grid_destroy(g);
}

static void test_mu_and_diameter(void) {
  el_grid* g = NULL;
  double mu = 1.0, d = 0.0;
  EXPECT(el_grid_create("sphere", 0, 0, 0, 128, 32, &g) == EL_OK);
  EXPECT(el_mu(g, 0.25, &mu) == EL_OK);
  EXPECT(mu < 0.0 && mu > -2.0);
  EXPECT(el_mu(g, -1.0, &mu) == EL_INVALID_TAU);
  el_grid_destroy(g);
  EXPECT(el_diameter_bound(4 * M_PI, 0.1, &d) == EL_OK && d > M_PI);
  EXPECT(el_diameter_bound(4 * M_PI, -0.1, &d) != EL_OK);
}

static void test_experiments(void) {
  EXPECT(el_experiment_count() == 11);
  EXPECT(strcmp(el_experiment_name(0), "monotonicity") == 0);
  EXPECT(strcmp(el_experiment_anchor(0), "Theorem 0.1") == 0);
  EXPECT(strcmp(el_experiment_name(10), "all") == 0);
  EXPECT(el_experiment_name(11) == NULL);
  EXPECT(el_experiment_anchor(11) == NULL);

  el_report* r = NULL;
  EXPECT(el_run("frobnicate", NULL, NULL, NULL, 0, &r) == EL_CONFIG_ERROR);
  EXPECT(r != NULL && el_report_exit_code(r) == 2);
  EXPECT(strstr(el_report_message(r), "frobnicate") != NULL);
  el_report_destroy(r);

  r = NULL;
  EXPECT(el_run("monotonicity", "/nonexistent/cfg", NULL, NULL, 0, &r) == EL_CONFIG_ERROR);
  EXPECT(r != NULL && el_report_exit_code(r) == 2);
  el_report_destroy(r);

  char dir[] = "/tmp/entropy_lab_capi_XXXXXX";
  if (!mkdtemp(dir)) {
    ++failures;
    return;
  }
  char cfg[512], out[512];
  snprintf(cfg, sizeof cfg, "%s/liyau.cfg", dir);
  snprintf(out, sizeof out, "%s/out", dir);
  FILE* fp = fopen(cfg, "w");
  fputs("manifold.kind = circle\ngrid.n1 = 256\n", fp);
  fclose(fp);
  const uint64_t seed = 3;
  r = NULL;
  EXPECT(el_run("liyau", cfg, out, &seed, 0, &r) == EL_OK);
  EXPECT(el_report_exit_code(r) == 0);
  EXPECT(el_report_failure_count(r) == 0);
  EXPECT(el_report_failure(r, 0) == NULL);
  EXPECT(strcmp(el_report_output_dir(r), out) == 0);
  el_report_destroy(r);

  fp = fopen(cfg, "w");
  fputs("manifold.kind = box\ntau.list = 0.01\ntolerance.equality = 0\n", fp);
  fclose(fp);
  r = NULL;
  EXPECT(el_run("liyau", cfg, out, NULL, 0, &r) == EL_ASSERTION_FAILED);
  EXPECT(el_report_exit_code(r) == 1);
  EXPECT(el_report_failure_count(r) > 0);
  EXPECT(el_report_failure(r, 0) != NULL);
  el_report_destroy(r);

  char cmd[600];
  snprintf(cmd, sizeof cmd, "rm -rf '%s'", dir);
  EXPECT(system(cmd) == 0);
}

int main(void) {
  test_status_and_version();
  test_grid();
  test_heat_and_entropy();
  test_mu_and_diameter();
  test_experiments();
  if (failures) fprintf(stderr, "%d expectation(s) failed\n", failures);
  else printf("all C interface checks passed\n");
  return failures ? 1 : 0;
}
