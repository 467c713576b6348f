#ifndef REINFORCED_H
#define REINFORCED_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define RF_OK 0

#define RF_NULL_POINTER 1

#define RF_INVALID_ARGUMENT 2

#define RF_NUMERICAL 3

#define RF_PANIC 4

/**
 * An interaction matrix Γ.
 */
typedef struct RfMatrix RfMatrix;

/**
 * One simulation replica.
 */
typedef struct RfSimulation RfSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *rf_last_error(void);

/**
 * Builds a matrix from `n*n` row-major entries (row = source process).
 *
 * # Safety
 * `entries` must point to `n*n` doubles and `out` must be writable.
 */
int32_t rf_matrix_new(size_t n, const double *entries, struct RfMatrix **out);

/**
 * Mean-field matrix: diagonal `gamma_star*(iota/n + 1 - iota)`, off-diagonal
 * `gamma_star*iota/n`.
 *
 * # Safety
 * `out` must be writable.
 */
int32_t rf_matrix_mean_field(double gamma_star, double iota, size_t n, struct RfMatrix **out);

/**
 * # Safety
 * `matrix` must come from `rf_matrix_new` or `rf_matrix_mean_field` and not
 * be used afterwards. Null is ignored.
 */
void rf_matrix_free(struct RfMatrix *matrix);

/**
 * Number of processes, or 0 for a null handle.
 *
 * # Safety
 * `matrix` must be a live handle or null.
 */
size_t rf_matrix_n(const struct RfMatrix *matrix);

/**
 * Perron root and normalized left/right eigenvectors. `u` and `v` may be
 * null; otherwise each must hold `n` doubles.
 *
 * # Safety
 * Pointers must be valid for the sizes above.
 */
int32_t rf_perron(const struct RfMatrix *matrix, double *gamma_star, double *u, double *v);

/**
 * Predicted growth exponent of each process; `exponents` holds `n` doubles.
 *
 * # Safety
 * Pointers must be valid for the sizes above.
 */
int32_t rf_growth_exponents(const struct RfMatrix *matrix, double *exponents);

/**
 * Upper tail of the chi-square distribution with `k` degrees of freedom.
 *
 * # Safety
 * `out` must be writable.
 */
int32_t rf_chisq_sf(double x, uint32_t k, double *out);

/**
 * `Γ(t + x)/Γ(t)`, with 1 at `t = 0`.
 *
 * # Safety
 * `out` must be writable.
 */
int32_t rf_zeta(uint64_t t, double x, double *out);

/**
 * Mean-field test of `n` counts. `valid` receives 1 when `iota0` lies in
 * the range where the null law holds, else 0.
 *
 * # Safety
 * `counts` must hold `n` doubles; out-pointers must be writable.
 */
int32_t rf_mean_field_test(const double *counts,
                           size_t n,
                           uint64_t t,
                           double iota0,
                           double gamma_star,
                           double *statistic,
                           double *p_value,
                           int32_t *valid);

/**
 * A simulator for replica `replica_id` of master seed `seed`. `theta` and
 * `c` hold `n` doubles each; `pi` may be null, otherwise `n` doubles.
 *
 * # Safety
 * Pointers must be valid for the sizes above.
 */
int32_t rf_simulation_new(const struct RfMatrix *matrix,
                          const double *theta,
                          const double *c,
                          const double *pi,
                          uint64_t seed,
                          uint64_t replica_id,
                          struct RfSimulation **out);

/**
 * # Safety
 * `sim` must come from `rf_simulation_new` and not be used afterwards. Null
 * is ignored.
 */
void rf_simulation_free(struct RfSimulation *sim);

/**
 * Advances one step. `outcomes` may be null, otherwise it receives `n`
 * bytes (1 = success). `category` may be null; it receives the sampled
 * source category or -1 when the simulator has no π.
 *
 * # Safety
 * Pointers must be valid for the sizes above.
 */
int32_t rf_simulation_step(struct RfSimulation *sim, uint8_t *outcomes, int64_t *category);

/**
 * Current time step, or 0 for a null handle.
 *
 * # Safety
 * `sim` must be a live handle or null.
 */
uint64_t rf_simulation_t(const struct RfSimulation *sim);

/**
 * Cumulative success counts; `counts` holds `n` values.
 *
 * # Safety
 * Pointers must be valid for the sizes above.
 */
int32_t rf_simulation_counts(const struct RfSimulation *sim, uint64_t *counts);

/**
 * Success probabilities for the next step; `probs` holds `n` doubles.
 *
 * # Safety
 * Pointers must be valid for the sizes above.
 */
int32_t rf_simulation_probabilities(const struct RfSimulation *sim, double *probs);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REINFORCED_H */
