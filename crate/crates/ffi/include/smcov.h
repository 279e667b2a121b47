#ifndef SMCOV_H
#define SMCOV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every call.
 */
typedef enum SmcovStatus {
  SMCOV_STATUS_OK = 0,
  SMCOV_STATUS_NULL_POINTER = 1,
  SMCOV_STATUS_INVALID_CONFIG = 2,
  SMCOV_STATUS_NUMERIC = 3,
  SMCOV_STATUS_INFEASIBLE = 4,
  SMCOV_STATUS_DOMAIN = 5,
  SMCOV_STATUS_PANIC = 6,
} SmcovStatus;

/**
 * Receiver selector, passed as `uint32_t`. `m` arguments are read only for
 * `SMCOV_RECEIVER_PZF`.
 */
typedef enum SmcovReceiver {
  SMCOV_RECEIVER_PZF = 0,
  SMCOV_RECEIVER_PZF_OPTIMAL = 1,
  SMCOV_RECEIVER_MMSE = 2,
} SmcovReceiver;

/**
 * Rate scheme selector, passed as `uint32_t`.
 */
typedef enum SmcovScheme {
  SMCOV_SCHEME_SM = 0,
  SMCOV_SCHEME_SST = 1,
} SmcovScheme;

/**
 * Opaque network scenario.
 */
typedef struct SmcovScenario SmcovScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Create a scenario. `*out_scenario` receives a handle to release with
 * [`smcov_scenario_free`].
 *
 * # Safety
 * `out_scenario` must be valid for writing one pointer.
 */
enum SmcovStatus smcov_scenario_new(double lambda,
                                    double alpha,
                                    double sigma2,
                                    size_t n_t,
                                    size_t n_r,
                                    struct SmcovScenario **out_scenario);

/**
 * Release a scenario. Null is accepted.
 *
 * # Safety
 * `scenario` must be null or a handle from [`smcov_scenario_new`] that has
 * not been freed.
 */
void smcov_scenario_free(struct SmcovScenario *scenario);

/**
 * PZF coverage `P(SINR > z)` with `m` cancelled groups.
 *
 * # Safety
 * `scenario` must be a live handle; `out_p` must be valid for writing.
 */
enum SmcovStatus smcov_coverage_pzf(const struct SmcovScenario *scenario,
                                    size_t m,
                                    double z,
                                    double *out_p);

/**
 * MMSE coverage `P(SINR > z)`.
 *
 * # Safety
 * `scenario` must be a live handle; `out_p` must be valid for writing.
 */
enum SmcovStatus smcov_coverage_mmse(const struct SmcovScenario *scenario, double z, double *out_p);

/**
 * Coverage at `n` thresholds: `out_p[i] = P(SINR > z[i])`.
 *
 * # Safety
 * `z` must be readable and `out_p` writable for `n` doubles (either may be
 * null when `n == 0`).
 */
enum SmcovStatus smcov_coverage_curve(const struct SmcovScenario *scenario,
                                      uint32_t rx,
                                      size_t m,
                                      const double *z,
                                      size_t n,
                                      double *out_p);

/**
 * Per-stream ergodic rate `E[log2(1 + SINR)]` in bits/s/Hz.
 *
 * # Safety
 * `scenario` must be a live handle; `out_rate` must be valid for writing.
 */
enum SmcovStatus smcov_ergodic_rate(const struct SmcovScenario *scenario,
                                    uint32_t rx,
                                    size_t m,
                                    double *out_rate);

/**
 * Rate quantile at level `q` in (0, 1). SM measures `N_t log2(1 + SINR)`,
 * SST measures `log2(1 + SINR)` of a single-stream link.
 *
 * # Safety
 * `scenario` must be a live handle; `out_rate` must be valid for writing.
 */
enum SmcovStatus smcov_rate_quantile(const struct SmcovScenario *scenario,
                                     uint32_t rx,
                                     size_t m,
                                     uint32_t scheme,
                                     double q,
                                     double *out_rate);

/**
 * Optimal number of cancelled groups for the scenario.
 *
 * # Safety
 * `scenario` must be a live handle; `out_m` must be valid for writing.
 */
enum SmcovStatus smcov_optimal_m(const struct SmcovScenario *scenario, size_t *out_m);

/**
 * Monte Carlo coverage estimate and its standard error.
 *
 * # Safety
 * `scenario` must be a live handle; both out-pointers must be valid for
 * writing.
 */
enum SmcovStatus smcov_mc_coverage(const struct SmcovScenario *scenario,
                                   uint32_t rx,
                                   size_t m,
                                   double z,
                                   size_t trials,
                                   uint64_t seed,
                                   double *out_mean,
                                   double *out_std_error);

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *smcov_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *smcov_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SMCOV_H */
