#ifndef KESCAPE_KESCAPE_H
#define KESCAPE_KESCAPE_H

/*
 * C interface to the kescape escape-rate library.
 *
 * Every fallible call returns a kescape_status; on failure a message is
 * available from kescape_last_error() on the same thread until the next call.
 * Output pointers are left untouched unless the call succeeds.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(KESCAPE_BUILDING_LIBRARY)
#    define KESCAPE_API __declspec(dllexport)
#  else
#    define KESCAPE_API __declspec(dllimport)
#  endif
#else
#  define KESCAPE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum kescape_status {
  KESCAPE_OK = 0,
  KESCAPE_ERR_DOMAIN = 1,
  KESCAPE_ERR_VALIDITY = 2,
  KESCAPE_ERR_SINGULARITY = 3,
  KESCAPE_ERR_CONVERGENCE = 4,
  KESCAPE_ERR_OVERFLOW = 5,
  KESCAPE_ERR_INSTABILITY = 6,
  KESCAPE_ERR_SAMPLING = 7,
  KESCAPE_ERR_INVALID_ARGUMENT = 8, /* null handle or pointer */
  KESCAPE_ERR_INTERNAL = 9
} kescape_status;

/* Model parameters (mu1 > mu2 > 0). Immutable; safe to share across threads. */
typedef struct kescape_model kescape_model;

KESCAPE_API const char* kescape_version(void);
KESCAPE_API const char* kescape_last_error(void);
KESCAPE_API const char* kescape_status_name(kescape_status status);

KESCAPE_API kescape_status kescape_model_create(double mu1, double mu2, kescape_model** out);
KESCAPE_API void kescape_model_destroy(kescape_model* model);

KESCAPE_API kescape_status kescape_critical_length(const kescape_model* model, double* out);
KESCAPE_API kescape_status kescape_length_from_m(const kescape_model* model, double m, double* out);
KESCAPE_API kescape_status kescape_m_from_length(const kescape_model* model, double length, double* out);
KESCAPE_API kescape_status kescape_max_instanton_length(const kescape_model* model, double* out);

/* Samples the instanton for `length` at n_points equally spaced z values
 * (endpoints included). Each output array must hold n_points doubles. */
KESCAPE_API kescape_status kescape_instanton_sample(const kescape_model* model, double length,
                                                    size_t n_points, double* z, double* phi1,
                                                    double* phi2);

KESCAPE_API kescape_status kescape_barrier(const kescape_model* model, double length, double* out);

/* Prefactor and negative eigenvalue about the governing saddle. */
KESCAPE_API kescape_status kescape_prefactor(const kescape_model* model, double length, double* gamma0,
                                             double* lambda_neg);
/* Product formula; valid below the critical length only. */
KESCAPE_API kescape_status kescape_prefactor_closed_form(const kescape_model* model, double length,
                                                         double* gamma0);
KESCAPE_API kescape_status kescape_det_ratio(const kescape_model* model, double length, double* out);
KESCAPE_API kescape_status kescape_negative_eigenvalue(const kescape_model* model, double length,
                                                       double* out);

typedef enum kescape_side { KESCAPE_SIDE_BELOW = 0, KESCAPE_SIDE_ABOVE = 1 } kescape_side;

/* Least-squares fit of ln gamma0 against ln|L - L_c| on n_points log-spaced
 * offsets in [window_lo, window_hi]. */
KESCAPE_API kescape_status kescape_fit_critical_exponent(const kescape_model* model, kescape_side side,
                                                         double window_lo, double window_hi,
                                                         size_t n_points, double* slope,
                                                         double* intercept);

/* gamma = gamma0 exp(-delta_e / epsilon). */
KESCAPE_API kescape_status kescape_kramers_rate(double delta_e, double gamma0, double lambda_neg,
                                                double epsilon, double* gamma);

typedef struct kescape_lattice_config {
  size_t n_sites;
  double length;
  double dt; /* 0 selects 0.4 * spacing^2 */
  double epsilon;
  uint64_t seed;
  double max_time;
} kescape_lattice_config;

/* n_sites 32, length 2, default dt, epsilon 0.5, seed 1, max_time 1e4. */
KESCAPE_API kescape_lattice_config kescape_lattice_config_default(void);

/* One first-passage run using noise substream run_index of config->seed. */
KESCAPE_API kescape_status kescape_first_passage(const kescape_model* model,
                                                 const kescape_lattice_config* config, uint64_t run_index,
                                                 double* time, int* censored);

/* Runs 0..n_runs-1 on `jobs` threads. times and censored must hold n_runs entries. */
KESCAPE_API kescape_status kescape_run_ensemble(const kescape_model* model,
                                                const kescape_lattice_config* config, size_t n_runs,
                                                size_t jobs, double* times, int* censored);

typedef struct kescape_arrhenius_result {
  double slope;
  double slope_stderr;
  double intercept;
} kescape_arrhenius_result;

/* Ensembles at each epsilon (config->epsilon is ignored) and the Arrhenius fit. */
KESCAPE_API kescape_status kescape_arrhenius_scan(const kescape_model* model,
                                                  const kescape_lattice_config* config,
                                                  const double* epsilons, size_t n_epsilons, size_t n_runs,
                                                  size_t jobs, kescape_arrhenius_result* out);

#ifdef __cplusplus
}
#endif

#endif
