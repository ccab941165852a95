#ifndef ROUGHSCALE_H
#define ROUGHSCALE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RsStatus {
  RS_STATUS_OK = 0,
  RS_STATUS_NULL_POINTER = 1,
  RS_STATUS_INVALID_ARGUMENT = 2,
  RS_STATUS_DATA_ERROR = 3,
  RS_STATUS_NUMERIC_ERROR = 4,
  RS_STATUS_PANIC = 5,
} RsStatus;

/**
 * Generalized Hurst exponent curve. Opaque to C.
 */
typedef struct RsGheCurve RsGheCurve;

typedef struct RsAnsatzFit {
  double h0;
  double a;
  double h0_stderr;
  double a_stderr;
  double residual_rms;
  size_t points_used;
  bool weighted;
  bool boundary_warning;
} RsAnsatzFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *rs_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rs_version(void);

/**
 * Density of the standardized daily return for `n` intraday samples.
 *
 * # Safety
 * `out` must be valid for a write of one `double`.
 */
enum RsStatus rs_finite_sample_density(uint32_t n, double x, double *out);

/**
 * `E[r̄^{2k}]`.
 *
 * # Safety
 * `out` must be valid for a write of one `double`.
 */
enum RsStatus rs_finite_sample_moment(uint32_t n, uint32_t k, double *out);

/**
 * `3n/(n+2)`.
 *
 * # Safety
 * `out` must be valid for a write of one `double`.
 */
enum RsStatus rs_finite_sample_kurtosis(uint32_t n, double *out);

/**
 * `a/(n+a)`.
 *
 * # Safety
 * `out` must be valid for a write of one `double`.
 */
enum RsStatus rs_relative_error(uint32_t n, double a, double *out);

/**
 * Runs MFDFA with default log-spaced scales on `series[0..len]` for the
 * `q_len` moments in `q`, and stores a new curve in `*out`. Release it with
 * [`rs_ghe_curve_free`].
 *
 * # Safety
 * `series` and `q` must point to `len` and `q_len` readable doubles, and
 * `out` must be valid for one pointer write.
 */
enum RsStatus rs_mfdfa_run(const double *series,
                           size_t len,
                           const double *q,
                           size_t q_len,
                           uint32_t detrend_order,
                           struct RsGheCurve **out);

/**
 * Number of points on the curve; zero for a null handle.
 *
 * # Safety
 * `curve` must be null or a live handle from [`rs_mfdfa_run`].
 */
size_t rs_ghe_curve_len(const struct RsGheCurve *curve);

/**
 * Point `index` of the curve. Any of the out-pointers may be null.
 *
 * # Safety
 * `curve` must be a live handle; non-null out-pointers must be writable.
 */
enum RsStatus rs_ghe_curve_get(const struct RsGheCurve *curve,
                               size_t index,
                               double *q_out,
                               double *h_out,
                               double *stderr_out);

/**
 * `h(−k) − h(k)`; both moments must be on the curve.
 *
 * # Safety
 * `curve` must be a live handle and `out` writable.
 */
enum RsStatus rs_ghe_curve_delta_h(const struct RsGheCurve *curve, double k, double *out);

/**
 * Releases a curve. Null is ignored.
 *
 * # Safety
 * `curve` must be null or a handle from [`rs_mfdfa_run`] not yet freed.
 */
void rs_ghe_curve_free(struct RsGheCurve *curve);

/**
 * Fits `H(Δ) = H₀·n/(n+a)` to `len` points. `stderr` may be null; the fit
 * is weighted only when it is given, every value is positive, and
 * `force_unweighted` is false.
 *
 * # Safety
 * `deltas` and `h2` (and `stderr` when non-null) must hold `len` values,
 * `exclude` must hold `exclude_len` values or be null when that is zero, and
 * `out` must be writable.
 */
enum RsStatus rs_fit_ansatz(const uint32_t *deltas,
                            const double *h2,
                            const double *stderr,
                            size_t len,
                            const uint32_t *exclude,
                            size_t exclude_len,
                            bool force_unweighted,
                            struct RsAnsatzFit *out);

/**
 * Writes `len` samples of fractional Gaussian noise into `out`.
 *
 * # Safety
 * `out` must be valid for `len` double writes.
 */
enum RsStatus rs_generate_fgn(double hurst, size_t len, uint64_t seed, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROUGHSCALE_H */
