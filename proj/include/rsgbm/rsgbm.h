#ifndef RSGBM_H
#define RSGBM_H

/* C interface to the regime-switching pricing and hedging core.
 *
 * All functions return RSGBM_OK (0) on success or a negative error code;
 * rsgbm_last_error() describes the most recent failure on the calling thread.
 * Handles are opaque and must be released with rsgbm_model_free.
 * Matrices are passed row-major.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RSGBM_API __declspec(dllexport)
#else
#define RSGBM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum {
    RSGBM_OK = 0,
    RSGBM_ERR_IO = -1,
    RSGBM_ERR_PARSE = -2,
    RSGBM_ERR_INVALID_MODEL = -3,
    RSGBM_ERR_BAD_ARG = -4,
    RSGBM_ERR_NUMERIC = -5,
    RSGBM_ERR_UNSUPPORTED = -6
};

/* payoff kinds */
enum { RSGBM_PAYOFF_CALL = 0, RSGBM_PAYOFF_PUT = 1 };

/* sampling laws */
enum { RSGBM_MEASURE_PHYSICAL = 0, RSGBM_MEASURE_FORWARD = 1, RSGBM_MEASURE_CHECK = 2 };

/* time-dependent generator kinds */
enum { RSGBM_GEN_PHYSICAL = 0, RSGBM_GEN_TILDE = 1, RSGBM_GEN_ARROW = 2 };

typedef struct rsgbm_model rsgbm_model;

RSGBM_API const char* rsgbm_version(void);
RSGBM_API const char* rsgbm_last_error(void);
RSGBM_API int rsgbm_default_threads(void);

/* --- model ----------------------------------------------------------- */

/* Load and validate a model from a TOML file / string.  When
 * allow_approx_generator is nonzero and the config carries a [transition]
 * matrix whose principal logarithm is not a valid generator, the first-order
 * embedding periods*(Q-I) is used instead. */
RSGBM_API int rsgbm_model_load(const char* path, int allow_approx_generator, rsgbm_model** out);
RSGBM_API int rsgbm_model_load_string(const char* text, int allow_approx_generator,
                                      rsgbm_model** out);
RSGBM_API void rsgbm_model_free(rsgbm_model* model);

RSGBM_API int rsgbm_model_regimes(const rsgbm_model* model);
RSGBM_API int rsgbm_model_assets(const rsgbm_model* model);
/* generator: regimes x regimes, row-major */
RSGBM_API int rsgbm_model_generator(const rsgbm_model* model, double* out);
/* excess drift m and rho: regimes x assets row-major; ell: length regimes */
RSGBM_API int rsgbm_model_risk(const rsgbm_model* model, double* m, double* rho, double* ell);

/* Standalone conversions (no model handle needed). */
RSGBM_API int rsgbm_generator_from_transition(const double* q, int n, double periods_per_year,
                                              int allow_approx, double* out);
RSGBM_API int rsgbm_discrete_to_continuous(const double* means, const double* vols, int n,
                                           double periods_per_year, double* mu, double* sigma);

/* --- deterministic curves -------------------------------------------- */

/* n_points rows on [0, horizon]; each output array holds n_points * regimes
 * values row-major (t varying along rows).  Any output pointer may be NULL. */
RSGBM_API int rsgbm_aux_curves(const rsgbm_model* model, double horizon, int n_points, double* t,
                               double* gamma, double* delta, double* beta, double* neg_diag_tilde,
                               double* neg_diag_arrow);

RSGBM_API int rsgbm_uniformization_bound(const rsgbm_model* model, int generator_kind,
                                         double horizon, double* lambda_out);

/* --- pricing ---------------------------------------------------------- */

RSGBM_API int rsgbm_price_mc(const rsgbm_model* model, int payoff_kind, double strike,
                             const double* s0, int regime, double horizon, int64_t pairs,
                             uint64_t seed, int threads, double* value, double* half_width);

/* pathwise initial position per asset (length = assets) */
RSGBM_API int rsgbm_delta_mc(const rsgbm_model* model, int payoff_kind, double strike,
                             const double* s0, int regime, double horizon, int64_t pairs,
                             uint64_t seed, int threads, double* delta, double* half_width);

/* single-asset transform pricer; delta_out may be NULL */
RSGBM_API int rsgbm_price_fourier(const rsgbm_model* model, int payoff_kind, double strike,
                                  double s0, int regime, double horizon, double* value,
                                  double* delta_out);

RSGBM_API int rsgbm_bs_price(double s0, double strike, double vol, double rate, double horizon,
                             int is_call, double* price, double* delta_out);

/* --- simulation -------------------------------------------------------- */

/* One uniformized regime path; returns candidate times/states (state[k] holds
 * on [time[k-1], time[k])).  n_events in/out: capacity in, count out. */
RSGBM_API int rsgbm_simulate_path(const rsgbm_model* model, int measure, int regime,
                                  double horizon, uint64_t seed, uint64_t path_index,
                                  int* n_events, double* times, int* states);

/* --- hedging ----------------------------------------------------------- */

typedef struct {
    int64_t n_paths;
    int n_steps;
    double initial_value;
    double mean_g, sd_g, ci_half;
    double rms_hedging_error;
    double coarse_fraction;
    int n_checkpoints;              /* up to 8 retained */
    double checkpoint_t[8];
    double gamma_g_mean[8], gamma_g_ci[8];
    double gamma_xg_mean[8], gamma_xg_ci[8]; /* first asset */
    double window_u, window_v;
    double covstat_mean, covstat_ci;         /* first asset */
} rsgbm_hedge_summary;

/* dump_path: optional CSV destination (path,t,S,tau,C,V,phi,G), single asset */
RSGBM_API int rsgbm_hedge(const rsgbm_model* model, int payoff_kind, double strike,
                          const double* s0, int regime, double horizon, int n_steps,
                          int64_t n_paths, uint64_t seed, int threads, int use_nested_mc,
                          int64_t inner_pairs, const char* dump_path,
                          rsgbm_hedge_summary* out);

#ifdef __cplusplus
}
#endif

#endif /* RSGBM_H */
