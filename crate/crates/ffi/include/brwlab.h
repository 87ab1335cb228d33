/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef BRWLAB_H
#define BRWLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BrwStatus {
  BRW_STATUS_OK = 0,
  BRW_STATUS_PARSE_ERROR = 1,
  BRW_STATUS_INVALID_ARGUMENT = 2,
  BRW_STATUS_INFEASIBLE = 3,
  BRW_STATUS_ENUMERATION_TOO_LARGE = 4,
  BRW_STATUS_CAP_EXCEEDED = 5,
  BRW_STATUS_NUMERIC = 6,
  BRW_STATUS_IO = 7,
  BRW_STATUS_NULL_POINTER = 8,
  BRW_STATUS_PANIC = 9,
} BrwStatus;

typedef enum BrwRegime {
  BRW_REGIME_SHIFT = 0,
  BRW_REGIME_DILATION = 1,
  BRW_REGIME_DEGENERATE = 2,
} BrwRegime;

typedef enum BrwScale {
  BRW_SCALE_SQRT_N = 0,
  BRW_SCALE_N = 1,
} BrwScale;

typedef enum BrwStrategyKind {
  BRW_STRATEGY_KIND_SHIFT = 0,
  BRW_STRATEGY_KIND_DILATION = 1,
} BrwStrategyKind;

typedef enum BrwMode {
  BRW_MODE_EXACT = 0,
  BRW_MODE_AGGREGATED = 1,
  BRW_MODE_HYBRID = 2,
} BrwMode;

/**
 * Opaque offspring-law handle.
 */
typedef struct BrwBranchingLaw BrwBranchingLaw;

/**
 * Opaque set handle.
 */
typedef struct BrwIntervalSet BrwIntervalSet;

typedef struct BrwRateReport {
  double p;
  uint32_t b;
  double nu_a;
  /**
   * `INFINITY` when no shift reaches `p`.
   */
  double i_tilde;
  bool has_x_star;
  double x_star;
  double j_tilde;
  double r_star;
  double x_star_dilation;
  double i_rate;
  double j_rate;
  enum BrwRegime regime;
  enum BrwScale scale;
  bool near_critical;
  bool non_monotone;
} BrwRateReport;

/**
 * A real number that may overflow a `double`, kept through its logarithm.
 */
typedef struct BrwExtReal {
  double ln_abs;
  bool negative;
  /**
   * The value as a `double`, saturating to `±INFINITY`.
   */
  double value;
} BrwExtReal;

typedef struct BrwLdpEstimate {
  int64_t w;
  uint64_t q;
  uint64_t s;
  uint64_t m;
  struct BrwExtReal log_prefix;
  uint64_t successes;
  uint64_t replicas;
  double q_hat;
  double ci_lo;
  double ci_hi;
  bool zero_success;
  double log_neg_log;
  double theory_rate;
  double relative_gap;
} BrwLdpEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the next failing call.
 */
const char *brw_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *brw_version(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void brw_string_free(char *s);

/**
 * Parses set notation such as `"(-inf,0] U [1,2)"`.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` writable.
 */
enum BrwStatus brw_set_parse(const char *text, struct BrwIntervalSet **out);

/**
 * # Safety
 * `set` must come from this library and not have been freed.
 */
void brw_set_free(struct BrwIntervalSet *set);

/**
 * Canonical notation of `set`; free with [`brw_string_free`]. NULL on a null handle.
 *
 * # Safety
 * `set` must be a live handle or NULL.
 */
char *brw_set_to_string(const struct BrwIntervalSet *set);

/**
 * # Safety
 * `set` must be a live handle and `out` writable.
 */
enum BrwStatus brw_set_complement(const struct BrwIntervalSet *set, struct BrwIntervalSet **out);

/**
 * Translates every point of `set` by `by`.
 *
 * # Safety
 * `set` must be a live handle and `out` writable.
 */
enum BrwStatus brw_set_shift(const struct BrwIntervalSet *set,
                             double by,
                             struct BrwIntervalSet **out);

/**
 * # Safety
 * `set` must be a live handle and `out` writable.
 */
enum BrwStatus brw_set_scale(const struct BrwIntervalSet *set,
                             double c,
                             struct BrwIntervalSet **out);

/**
 * # Safety
 * `set` must be a live handle or NULL (which contains nothing).
 */
bool brw_set_contains(const struct BrwIntervalSet *set, double t);

/**
 * Standard normal distribution function.
 */
double brw_phi(double z);

/**
 * `P(S_n = k)` for the simple random walk.
 */
double brw_srw_pmf(uint64_t n, int64_t k);

/**
 * Gaussian measure of `set`.
 *
 * # Safety
 * `set` must be a live handle and `out` writable.
 */
enum BrwStatus brw_nu(const struct BrwIntervalSet *set, double *out);

/**
 * `nu((A - x) / sqrt(1 - r))`.
 *
 * # Safety
 * `set` must be a live handle and `out` writable.
 */
enum BrwStatus brw_varphi(const struct BrwIntervalSet *set, double r, double x, double *out);

/**
 * Law of the `n`-step simple random walk on the lattice points of `set`.
 *
 * # Safety
 * `set` must be a live handle and `out` writable.
 */
enum BrwStatus brw_nu_n(uint64_t n, const struct BrwIntervalSet *set, double *out);

/**
 * Rate report for `P(Zbar_n(sqrt n A) >= p)` with minimal offspring `b`.
 *
 * # Safety
 * `set` must be a live handle and `out` writable.
 */
enum BrwStatus brw_classify(const struct BrwIntervalSet *set,
                            double p,
                            uint32_t b,
                            struct BrwRateReport *out);

/**
 * Rate report for the lower deviation `P(Zbar_n(sqrt n A) <= p)`.
 *
 * # Safety
 * `set` must be a live handle and `out` writable.
 */
enum BrwStatus brw_lower_tail_rate(const struct BrwIntervalSet *set,
                                   double p,
                                   uint32_t b,
                                   struct BrwRateReport *out);

/**
 * Parses an offspring law such as `"2:0.5,3:0.5"`.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` writable.
 */
enum BrwStatus brw_law_parse(const char *text, struct BrwBranchingLaw **out);

/**
 * # Safety
 * `law` must come from this library and not have been freed.
 */
void brw_law_free(struct BrwBranchingLaw *law);

/**
 * Exact `P(Zbar_n(sqrt n A) >= p)` by enumeration, rounded to a double.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum BrwStatus brw_enumerate_exact(uint64_t n,
                                   const struct BrwBranchingLaw *law,
                                   const struct BrwIntervalSet *set,
                                   double p,
                                   double *out);

/**
 * Log-probability of the forced prefix of a strategy.
 *
 * # Safety
 * `law` must be a live handle and `out` writable.
 */
enum BrwStatus brw_strategy_prefix_logprob(enum BrwStrategyKind kind,
                                           double x,
                                           double r,
                                           uint64_t n,
                                           const struct BrwBranchingLaw *law,
                                           struct BrwExtReal *out);

/**
 * Composed lower-bound estimate of `P(Zbar_n(sqrt n A) >= p)`. `cap` is
 * used by the hybrid mode only.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum BrwStatus brw_ldp_lower_bound(enum BrwStrategyKind kind,
                                   double x,
                                   double r,
                                   uint64_t n,
                                   const struct BrwIntervalSet *set,
                                   double p,
                                   const struct BrwBranchingLaw *law,
                                   uint64_t replicas,
                                   enum BrwMode mode,
                                   uint64_t cap,
                                   uint64_t seed,
                                   struct BrwLdpEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BRWLAB_H */
