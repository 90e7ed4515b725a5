/* C interface to the condshrink library.
 *
 * Every function returning cs_status reports failure through the status code
 * and leaves a message retrievable with cs_last_error() on the calling thread.
 * Objects are opaque handles released with their matching *_free function.
 */
#ifndef CONDSHRINK_H
#define CONDSHRINK_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(CONDSHRINK_BUILDING)
#    define CS_API __declspec(dllexport)
#  else
#    define CS_API __declspec(dllimport)
#  endif
#else
#  define CS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cs_status {
  CS_OK = 0,
  CS_ERR_DOMAIN = 1,
  CS_ERR_DIVERGENT_INTEGRAL = 2,
  CS_ERR_SINGULAR_OBSERVATION = 3,
  CS_ERR_NONSTATIONARY = 4,
  CS_ERR_DIMENSION_TOO_SMALL = 5,
  CS_ERR_NOT_PSD = 6,
  CS_ERR_CONFIG = 7,
  CS_ERR_IO = 8,
  CS_ERR_RUN_FAILED = 9,
  CS_ERR_INVALID_ARGUMENT = 10,
  CS_ERR_INTERNAL = 99
} cs_status;

typedef enum cs_gamma_method {
  CS_GAMMA_CLOSED_FORM = 0,
  CS_GAMMA_QUADRATURE = 1
} cs_gamma_method;

typedef struct cs_buffer cs_buffer;
typedef struct cs_experiment cs_experiment;
typedef struct cs_result cs_result;

CS_API const char* cs_version(void);
/* Message of the last failed call on this thread; "" if none. */
CS_API const char* cs_last_error(void);

/* Owned byte buffers (CSV, JSON, SVG text). */
CS_API const char* cs_buffer_data(const cs_buffer* buf);
CS_API size_t cs_buffer_size(const cs_buffer* buf);
CS_API void cs_buffer_free(cs_buffer* buf);

/* ---- constants ---------------------------------------------------------- */
CS_API cs_status cs_integral_I(double a, double* out);
CS_API cs_status cs_gamma_p(int p, double d, double lambda_star, double a_star,
                            cs_gamma_method method, double* out);
CS_API cs_status cs_risk_at_zero(int p, double* out);
CS_API cs_status cs_shrink_constant_theorem21(int p, double lambda_star, double gamma_p,
                                              double* out);
CS_API cs_status cs_risk_improvement_bound(int p, double lambda_star, double gamma_p,
                                           double* out);

/* ---- estimators: `out` has room for p doubles --------------------------- */
CS_API cs_status cs_estimate_james_stein(const double* y, size_t p, double* out);
CS_API cs_status cs_estimate_shrink(const double* y, size_t p, double c, double* out);

/* ---- AR(1) noise -------------------------------------------------------- */
/* Row-major p x p covariance into `out`. */
CS_API cs_status cs_ar1_covariance(double a, int p, double* out);
CS_API cs_status cs_ar1_shrink_constant(int p, double alpha, double gamma_p, double* out);

/* ---- OU-Levy conditional covariance -------------------------------------- */
typedef struct cs_ou_levy_model {
  double a;
  double rho1;
  double rho2;
  double lambda;
  int n;
  int p;
  int grid_steps_per_unit;
} cs_ou_levy_model;

/* V_n(G) for the given jump times (row-major p x p into `out`). */
CS_API cs_status cs_ou_conditional_covariance(const cs_ou_levy_model* model, const double* times,
                                              size_t jump_count, double* out);

/* ---- tables ------------------------------------------------------------- */
CS_API cs_status cs_gamma_table(int p_lo, int p_hi, double d, double a_star, cs_buffer** csv,
                                double* max_abs_diff);
CS_API cs_status cs_fig1(int p_max, cs_buffer** csv, cs_buffer** svg);

/* ---- experiments -------------------------------------------------------- */
CS_API cs_status cs_experiment_load(const char* path, cs_experiment** out);
CS_API cs_status cs_experiment_parse(const char* text, cs_experiment** out);
CS_API void cs_experiment_free(cs_experiment* exp);
CS_API const char* cs_experiment_name(const cs_experiment* exp);
/* Worker count; 0 = hardware concurrency. Never changes results. */
CS_API cs_status cs_experiment_set_threads(cs_experiment* exp, int threads);
CS_API cs_status cs_experiment_set_seed(cs_experiment* exp, unsigned long long seed);
CS_API cs_status cs_experiment_set_replicates(cs_experiment* exp, int replicates);
/* Fully resolved config; cs_experiment_parse() of it reproduces the run. */
CS_API cs_status cs_experiment_config_json(const cs_experiment* exp, cs_buffer** out);

CS_API cs_status cs_experiment_run(const cs_experiment* exp, cs_result** out);
CS_API void cs_result_free(cs_result* res);
/* 1 when every grid point passes the dominance check, else 0. */
CS_API int cs_result_passed(const cs_result* res);
CS_API cs_status cs_result_risks_csv(const cs_result* res, cs_buffer** out);
CS_API cs_status cs_result_dominance_csv(const cs_result* res, cs_buffer** out);
CS_API cs_status cs_result_json(const cs_result* res, cs_buffer** out);

#ifdef __cplusplus
}
#endif

#endif /* CONDSHRINK_H */
