/* bilo: stochastic bilevel optimization benchmark library, C interface.
 *
 * All functions return BILO_OK on success. On failure they return an error
 * category and leave a human-readable message in bilo_last_error() (thread
 * local). Handles are opaque; free them with the matching *_free function.
 */
#ifndef BILO_BILO_H
#define BILO_BILO_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bilo_status {
  BILO_OK = 0,
  BILO_ERROR_INVALID_ARGUMENT = 1,
  BILO_ERROR_INVALID_STATE = 2,
  BILO_ERROR_DIVERGED = 3,
  BILO_ERROR_IO = 4,
  BILO_ERROR_NUMERICAL = 5,
  BILO_ERROR_INTERNAL = 6
} bilo_status;

const char* bilo_version(void);
const char* bilo_last_error(void);
void bilo_string_free(char* s);

/* ---- problems ---------------------------------------------------------- */

typedef struct bilo_problem bilo_problem;

/* Quadratic bilevel instance on generated linear-model data. */
bilo_status bilo_problem_synthetic(const double* w0, int32_t dim, int64_t n_train, int64_t n_val,
                                   double reg, double feature_std, double noise_std,
                                   double feature_scale, uint64_t data_seed, bilo_problem** out);

/* Label-reweighting instance on generated Gaussian blob data. */
bilo_status bilo_problem_hyperclean(int64_t n_train, int64_t n_val, int64_t n_test, int32_t dim,
                                    int32_t num_classes, double corruption_prob, double ridge,
                                    uint64_t data_seed, bilo_problem** out);

bilo_status bilo_problem_save(const bilo_problem* problem, const char* path);
bilo_status bilo_problem_load(const char* path, bilo_problem** out);
void bilo_problem_free(bilo_problem* problem);

int64_t bilo_problem_dim_x(const bilo_problem* problem);
int64_t bilo_problem_dim_y(const bilo_problem* problem);

/* Closed forms; synthetic problems only. Buffers are caller-allocated with
 * the matching dimension. */
bilo_status bilo_synthetic_y_star(const bilo_problem* problem, const double* x, double* y_out);
bilo_status bilo_synthetic_grad_phi(const bilo_problem* problem, const double* x, double* g_out);
bilo_status bilo_synthetic_phi(const bilo_problem* problem, const double* x, double* phi_out);

/* ---- runs -------------------------------------------------------------- */

typedef struct bilo_trace bilo_trace;

typedef struct bilo_trace_row {
  int64_t iter;
  double elapsed_s;
  double phi;
  double grad_norm;
  uint64_t gc_f;
  uint64_t gc_g;
  uint64_t jv_g;
  uint64_t hv_g;
} bilo_trace_row;

/* Runs the [algorithm] section of a config document against an existing
 * problem handle (the document's [problem] section is validated but unused).
 * deterministic != 0 forces full-batch deterministic mode. */
bilo_status bilo_run(const bilo_problem* problem, const char* config_text, uint64_t seed,
                     int32_t deterministic, bilo_trace** out);

int64_t bilo_trace_num_rows(const bilo_trace* trace);
bilo_status bilo_trace_get(const bilo_trace* trace, int64_t row, bilo_trace_row* out);
bilo_status bilo_trace_write_csv(const bilo_trace* trace, const char* path);
void bilo_trace_free(bilo_trace* trace);

/* ---- analysis ---------------------------------------------------------- */

/* Test accuracy and macro F1 of the flattened classifier y on the problem's
 * held-out test set (hyperclean problems only). */
bilo_status bilo_hyperclean_metrics(const bilo_problem* problem, const double* y,
                                    double* accuracy_out, double* f1_out);

typedef struct bilo_profile {
  double M;
  double L;
  double tau;
  double rho;
  double mu;
  double sigma_f_sq;
  double sigma_g_sq;
  double sigma_g1_sq;
  double sigma_g2_sq;
} bilo_profile;

/* Instance-derived regularity constants over the ball of the given radius
 * (synthetic problems only). */
bilo_status bilo_measure_profile(const bilo_problem* problem, double domain_radius,
                                 bilo_profile* out);

/* Smoothness constant of the reduced objective. */
bilo_status bilo_l_phi(const bilo_profile* profile, double* out);

typedef struct bilo_any_loop_params {
  double alpha, beta, eta;
  double r_v, r_w, rho_y;
  double rho_1, rho_2;
  double l_31;
} bilo_any_loop_params;

/* Step sizes valid for any loop lengths T, J >= 1; the contraction constant
 * depends on the run's J. */
bilo_status bilo_any_loop_params_get(const bilo_profile* profile, int32_t j_steps,
                                     bilo_any_loop_params* out);

typedef struct bilo_scaled_loop_params {
  double alpha, beta, eta;
  double rho_1, rho_2;
  double l_31;
  int64_t t_min, j_min;
} bilo_scaled_loop_params;

/* Lower-complexity regime: minimum loop lengths grow with the condition
 * number. */
bilo_status bilo_scaled_loop_params_get(const bilo_profile* profile,
                                        bilo_scaled_loop_params* out);

/* ---- experiments ------------------------------------------------------- */

/* Full pipeline: parse config text (with "section.key=value" overrides),
 * build the problem, run every seed in a worker pool, write one trace CSV per
 * seed plus a summary. out_dir overrides the config's output directory when
 * non-NULL. summary_path_out, when non-NULL, receives a malloc'd path string
 * (free with bilo_string_free). */
bilo_status bilo_experiment_run(const char* config_text, const char* const* overrides,
                                int32_t n_overrides, const char* out_dir,
                                char** summary_path_out);

/* Theory constants report for the configured (synthetic) problem. */
bilo_status bilo_constants_report(const char* config_text, const char* const* overrides,
                                  int32_t n_overrides, char** report_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* BILO_BILO_H */
