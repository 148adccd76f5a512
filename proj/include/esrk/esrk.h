#ifndef ESRK_ESRK_H
#define ESRK_ESRK_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum esrk_status {
  ESRK_OK = 0,
  ESRK_FAILURE = 1, /* ran to completion but did not converge / certify */
  ESRK_USAGE_ERROR = 2,
  ESRK_PARSE_ERROR = 3,
  ESRK_IO_ERROR = 4,
  ESRK_CONSTRAINT_ERROR = 5,
  ESRK_STRUCTURAL_ERROR = 6,
  ESRK_INTERNAL_ERROR = 7
} esrk_status;

typedef struct esrk_config esrk_config;
typedef struct esrk_tableau esrk_tableau;
typedef struct esrk_solve_report esrk_solve_report;

/* Message of the last failed call on this thread ("" after a success). */
const char* esrk_last_error(void);
/* Character offset for parse errors, -1 otherwise. */
long esrk_last_error_position(void);
const char* esrk_version(void);
/* Frees strings returned through char** out-parameters. */
void esrk_string_free(char* s);

/* Campaign configuration. */
esrk_status esrk_config_create(esrk_config** out);
esrk_status esrk_config_load(const char* path, esrk_config** out);
esrk_status esrk_config_parse(const char* text, esrk_config** out);
/* Dotted key, e.g. "solver.tol", "search.acceptance", "benchmarks.problems". */
esrk_status esrk_config_set(esrk_config* cfg, const char* key, const char* value);
/* Sets search.baseline_mean from a baseline statistics file. */
esrk_status esrk_config_use_baseline(esrk_config* cfg, const char* stats_path);
esrk_status esrk_config_to_text(const esrk_config* cfg, char** out);
void esrk_config_destroy(esrk_config* cfg);

/* Tableaus. Matrices are row-major s*s. */
esrk_status esrk_tableau_from_reduced(size_t s, const double* a_sub, const double* b, esrk_tableau** out);
esrk_status esrk_tableau_from_full(size_t s, const double* A, const double* b, esrk_tableau** out);
esrk_status esrk_tableau_load(const char* path, esrk_tableau** out);
size_t esrk_tableau_stages(const esrk_tableau* t);
/* Any output pointer may be NULL. */
esrk_status esrk_tableau_get(const esrk_tableau* t, double* A, double* b, double* c);
esrk_status esrk_tableau_order_residuals(const esrk_tableau* t, double residuals[8]);
/* beta receives s+1 coefficients; extent uses the default scan. */
esrk_status esrk_tableau_stability(const esrk_tableau* t, double* beta, double* extent);
void esrk_tableau_destroy(esrk_tableau* t);

/* Single solve. heuristics is a ';'-separated list or NULL. */
esrk_status esrk_solve(const esrk_config* cfg, const char* heuristics, esrk_solve_report** out);
/* "Converged", "BudgetExhausted" or "Infeasible". */
const char* esrk_report_status(const esrk_solve_report* r);
long esrk_report_iterations(const esrk_solve_report* r);
double esrk_report_residual_norm(const esrk_solve_report* r);
double esrk_report_extent(const esrk_solve_report* r);
int esrk_report_free_dimension(const esrk_solve_report* r);
/* ESRK_FAILURE when the solve did not converge. */
esrk_status esrk_report_tableau(const esrk_solve_report* r, esrk_tableau** out);
void esrk_report_destroy(esrk_solve_report* r);

/* Commands. Each writes its files under the config's output_dir (or the
   given path) and returns a JSON summary in *summary, also on ESRK_FAILURE. */
typedef struct esrk_grid_spec {
  double re_min, re_max, im_min, im_max;
  size_t nx, ny;
} esrk_grid_spec;

void esrk_grid_spec_default(esrk_grid_spec* g);
esrk_status esrk_cmd_baseline(const esrk_config* cfg, long runs, char** summary);
esrk_status esrk_cmd_discover(const esrk_config* cfg, long budget, char** summary);
esrk_status esrk_cmd_solve(const esrk_config* cfg, const char* const* heuristics, size_t count,
                           const char* tableau_path, char** summary);
esrk_status esrk_cmd_validate(const esrk_config* cfg, const char* tableau_path, const char* grid_path,
                              char** summary);
esrk_status esrk_cmd_converge(const esrk_config* cfg, const char* tableau_path, const char* problem,
                              const char* study_path, char** summary);
esrk_status esrk_cmd_stability(const esrk_config* cfg, const char* tableau_path, const esrk_grid_spec* grid,
                               const char* grid_path, char** summary);

#ifdef __cplusplus
}
#endif

#endif
