#ifndef GARMA_H
#define GARMA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum GarmaStatus {
  GARMA_STATUS_OK = 0,
  /**
   * A required pointer was null or a length was inconsistent.
   */
  GARMA_STATUS_NULL_ARGUMENT = 1,
  /**
   * Invalid data, family or configuration.
   */
  GARMA_STATUS_INVALID_INPUT = 2,
  /**
   * The model could not be evaluated or simulated (overflow).
   */
  GARMA_STATUS_NUMERICAL = 3,
  /**
   * Too few draws for the requested operation.
   */
  GARMA_STATUS_EMPTY_SAMPLE = 4,
  /**
   * Any other failure, including internal panics.
   */
  GARMA_STATUS_INTERNAL = 5,
} GarmaStatus;

typedef enum GarmaFamilyKind {
  GARMA_FAMILY_KIND_POISSON = 0,
  GARMA_FAMILY_KIND_BINOMIAL = 1,
  GARMA_FAMILY_KIND_NEG_BINOMIAL = 2,
} GarmaFamilyKind;

/**
 * Opaque chain of posterior draws.
 */
typedef struct GarmaChain GarmaChain;

/**
 * Opaque count series.
 */
typedef struct GarmaSeries GarmaSeries;

/**
 * A family and its fixed hyperparameter: `m` is read for binomial, `k` for
 * negative binomial.
 */
typedef struct GarmaFamily {
  enum GarmaFamilyKind kind;
  uint64_t m;
  double k;
} GarmaFamily;

/**
 * Sampler settings. Start from [`garma_sampler_config_default`].
 */
typedef struct GarmaSamplerConfig {
  size_t p_max;
  size_t q_max;
  double sd_alpha;
  double sd_phi;
  double sd_theta;
  double sd_beta;
  double inc_prob;
  double rj_scale;
  double rw_scale;
  double toggle_prob;
  size_t iters;
  uint64_t seed;
} GarmaSamplerConfig;

/**
 * Posterior summary of one coefficient. `geweke_z` and `ess` are NaN when
 * undefined.
 */
typedef struct GarmaCoefSummary {
  double mean;
  double median;
  double sd;
  double hpd_lo;
  double hpd_hi;
  double q_lo;
  double q_hi;
  double ess;
  double geweke_z;
  double incl_freq;
} GarmaCoefSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread; empty after a
 * success. Valid until the next call into this library on the same thread.
 */
const char *garma_last_error(void);

/**
 * Library version as a static string.
 */
const char *garma_version(void);

/**
 * Creates a series from `n` counts and an optional row-major `n x r`
 * covariate matrix (covariates are named `x1..xr`).
 *
 * # Safety
 * `y` must point to `n` values, `x` to `n * r` values, `out` to writable
 * storage.
 */
enum GarmaStatus garma_series_new(const uint64_t *y,
                                  size_t n,
                                  const double *x,
                                  size_t r,
                                  double c,
                                  struct GarmaSeries **out);

/**
 * Number of observations, 0 for a null handle.
 *
 * # Safety
 * `series` must be null or a live handle.
 */
size_t garma_series_len(const struct GarmaSeries *series);

/**
 * Borrows the counts.
 *
 * # Safety
 * `series` must be a live handle and `counts`, `len` writable.
 */
enum GarmaStatus garma_series_counts(const struct GarmaSeries *series,
                                     const uint64_t **counts,
                                     size_t *len);

/**
 * # Safety
 * `series` must be null or a handle not freed before.
 */
void garma_series_free(struct GarmaSeries *series);

/**
 * Simulates `n` observations of a GARMA(p, q) model without covariates,
 * discarding `warmup` leading draws.
 *
 * # Safety
 * `phi` and `theta` must point to `p` and `q` values; `out` must be writable.
 */
enum GarmaStatus garma_simulate(struct GarmaFamily family,
                                double alpha,
                                const double *phi,
                                size_t p,
                                const double *theta,
                                size_t q,
                                size_t n,
                                size_t warmup,
                                double c,
                                uint64_t seed,
                                struct GarmaSeries **out);

/**
 * Conditional log-likelihood of a parameter vector. Zero-valued coefficients
 * are treated as excluded.
 *
 * # Safety
 * `beta`, `phi`, `theta` must point to `r`, `p`, `q` values; `series` must be
 * a live handle and `out` writable.
 */
enum GarmaStatus garma_log_likelihood(const struct GarmaSeries *series,
                                      struct GarmaFamily family,
                                      double alpha,
                                      const double *beta,
                                      size_t r,
                                      const double *phi,
                                      size_t p,
                                      const double *theta,
                                      size_t q,
                                      double *out);

/**
 * The library's default sampler settings.
 */
struct GarmaSamplerConfig garma_sampler_config_default(void);

/**
 * Runs the sampler. Only the intercept is exempt from birth/death moves.
 *
 * # Safety
 * `series` must be a live handle, `config` readable and `out` writable.
 */
enum GarmaStatus garma_run_chain(const struct GarmaSeries *series,
                                 struct GarmaFamily family,
                                 const struct GarmaSamplerConfig *config,
                                 struct GarmaChain **out);

/**
 * Number of recorded rows, 0 for a null handle.
 *
 * # Safety
 * `chain` must be null or a live handle.
 */
size_t garma_chain_rows(const struct GarmaChain *chain);

/**
 * Number of coefficients per row, 0 for a null handle.
 *
 * # Safety
 * `chain` must be null or a live handle.
 */
size_t garma_chain_dim(const struct GarmaChain *chain);

/**
 * Name of coefficient `j` (`alpha`, `phi1`, ...), or null when out of range.
 *
 * # Safety
 * `chain` must be null or a live handle.
 */
const char *garma_chain_coef_name(const struct GarmaChain *chain, size_t j);

/**
 * Borrows the row-major `rows x dim` draw matrix.
 *
 * # Safety
 * `chain` must be a live handle and `draws` writable.
 */
enum GarmaStatus garma_chain_draws(const struct GarmaChain *chain, const double **draws);

/**
 * New chain without the first `n_burn` rows, then keeping every `lag`-th.
 *
 * # Safety
 * `chain` must be a live handle and `out` writable.
 */
enum GarmaStatus garma_chain_burn_thin(const struct GarmaChain *chain,
                                       size_t n_burn,
                                       size_t lag,
                                       struct GarmaChain **out);

/**
 * Writes one summary per coefficient into `out`, which must hold `cap`
 * entries; `cap` must be at least the chain's dimension.
 *
 * # Safety
 * `chain` must be a live handle and `out` point to `cap` writable entries.
 */
enum GarmaStatus garma_chain_summary(const struct GarmaChain *chain,
                                     double level,
                                     struct GarmaCoefSummary *out,
                                     size_t cap);

/**
 * # Safety
 * `chain` must be null or a handle not freed before.
 */
void garma_chain_free(struct GarmaChain *chain);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GARMA_H */
