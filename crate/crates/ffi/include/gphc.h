#ifndef GPHC_H
#define GPHC_H

/* Generated by cbindgen from the gphc-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every gphc function.
 */
typedef enum GphcStatus {
  GphcStatus_Ok = 0,
  /**
   * Numerical failure (root finding, cancellation, non-existent moments).
   */
  GphcStatus_Numerical = 1,
  /**
   * Invalid design, data or argument.
   */
  GphcStatus_Validation = 2,
  /**
   * A required pointer argument was null.
   */
  GphcStatus_NullArgument = 3,
  /**
   * A string argument was not valid UTF-8.
   */
  GphcStatus_Utf8 = 4,
} GphcStatus;

/**
 * Opaque exact-distribution evaluator for one design, model and target.
 */
typedef struct GphcMixtureHandle GphcMixtureHandle;

/**
 * Opaque censored sample.
 */
typedef struct GphcSampleHandle GphcSampleHandle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message into `buf` (null-terminated, truncated to
 * `len`). Returns the full message length in bytes.
 *
 * # Safety
 * `buf` must point to at least `len` writable bytes (or be null).
 */
uintptr_t gphc_last_error(char *buf, uintptr_t len);

/**
 * Parse a CSV text (`z,cause[,removed]` header) under an explicit design.
 *
 * # Safety
 * `csv_text` must be a valid null-terminated string, `removals` must point
 * to `removals_len` readable u32 values, and `out` must be a valid pointer.
 */
enum GphcStatus gphc_sample_from_csv(const char *csv_text,
                                     uint32_t n,
                                     uint32_t m,
                                     uint32_t k,
                                     double deadline,
                                     const uint32_t *removals,
                                     uintptr_t removals_len,
                                     struct GphcSampleHandle **out);

/**
 * The bundled irradiated-mice dataset (n=77, k=20, m=25, T=700).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum GphcStatus gphc_sample_builtin_hoel(struct GphcSampleHandle **out);

/**
 * Simulate one sample from mean lifetimes (theta1, theta2) under the design.
 *
 * # Safety
 * `removals` must point to `removals_len` readable values; `out` must be
 * valid.
 */
enum GphcStatus gphc_simulate(uint32_t n,
                              uint32_t m,
                              uint32_t k,
                              double deadline,
                              const uint32_t *removals,
                              uintptr_t removals_len,
                              double theta1,
                              double theta2,
                              uint64_t seed,
                              struct GphcSampleHandle **out);

/**
 * Release a sample handle.
 *
 * # Safety
 * `h` must come from this library and not be freed twice.
 */
void gphc_sample_free(struct GphcSampleHandle *h);

/**
 * Sufficient statistics of a sample.
 *
 * # Safety
 * All pointers must be valid.
 */
enum GphcStatus gphc_sample_stats(const struct GphcSampleHandle *h,
                                  uint32_t *j,
                                  uint32_t *d1,
                                  uint32_t *d2,
                                  double *w);

/**
 * MLEs W/D1 and W/D2. A nonexistent estimate is reported as NaN with its
 * flag cleared.
 *
 * # Safety
 * All pointers must be valid.
 */
enum GphcStatus gphc_fit(const struct GphcSampleHandle *h,
                         double *theta1,
                         int32_t *theta1_exists,
                         double *theta2,
                         int32_t *theta2_exists);

/**
 * Exact confidence interval for `target` (1 or 2) at level `1 - alpha`,
 * nuisance at its MLE. When no finite upper limit exists, `exists` is 0 and
 * `upper` is NaN (the lower endpoint is still reported).
 *
 * # Safety
 * All pointers must be valid.
 */
enum GphcStatus gphc_exact_ci(const struct GphcSampleHandle *h,
                              int32_t target,
                              double alpha,
                              double *lower,
                              double *upper,
                              int32_t *exists);

/**
 * Parametric bootstrap percentile interval (B replicates, seeded).
 *
 * # Safety
 * All pointers must be valid.
 */
enum GphcStatus gphc_bootstrap_ci(const struct GphcSampleHandle *h,
                                  int32_t target,
                                  double alpha,
                                  uint32_t b,
                                  uint64_t seed,
                                  double *lower,
                                  double *upper);

/**
 * Bayes point estimates of the mean lifetimes under a Beta-Gamma prior
 * (b0, a0, a1, a2).
 *
 * # Safety
 * All pointers must be valid.
 */
enum GphcStatus gphc_bayes_estimates(const struct GphcSampleHandle *h,
                                     double b0,
                                     double a0,
                                     double a1,
                                     double a2,
                                     double *theta1,
                                     double *theta2);

/**
 * HPD credible interval by direct posterior sampling. `g` selects the
 * transform: 1 theta1, 2 theta2, 3 lambda1, 4 lambda2, 5 lambda1/lambda2.
 *
 * # Safety
 * All pointers must be valid.
 */
enum GphcStatus gphc_hpd_interval(const struct GphcSampleHandle *h,
                                  double b0,
                                  double a0,
                                  double a1,
                                  double a2,
                                  int32_t g,
                                  double alpha,
                                  uintptr_t draws,
                                  uint64_t seed,
                                  double *lower,
                                  double *upper);

/**
 * Build the exact conditional distribution of one MLE under a design and
 * model.
 *
 * # Safety
 * `removals` must point to `removals_len` readable values; `out` must be
 * valid.
 */
enum GphcStatus gphc_mixture_new(uint32_t n,
                                 uint32_t m,
                                 uint32_t k,
                                 double deadline,
                                 const uint32_t *removals,
                                 uintptr_t removals_len,
                                 double theta1,
                                 double theta2,
                                 int32_t target,
                                 struct GphcMixtureHandle **out);

/**
 * Conditional density and CDF of the MLE at `x`.
 *
 * # Safety
 * All pointers must be valid.
 */
enum GphcStatus gphc_mixture_eval(const struct GphcMixtureHandle *h,
                                  double x,
                                  double *pdf,
                                  double *cdf);

/**
 * P(no failure of the target cause), the conditioning complement.
 *
 * # Safety
 * All pointers must be valid.
 */
enum GphcStatus gphc_mixture_prob_zero(const struct GphcMixtureHandle *h, double *prob);

/**
 * Release a mixture handle.
 *
 * # Safety
 * `h` must come from this library and not be freed twice.
 */
void gphc_mixture_free(struct GphcMixtureHandle *h);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GPHC_H */
