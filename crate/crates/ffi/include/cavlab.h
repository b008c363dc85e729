#ifndef CAVLAB_H
#define CAVLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Bits of `CavRegionVerdict::violated`.
 */
#define CAV_VIOLATES_I 1

#define CAV_VIOLATES_II 2

#define CAV_VIOLATES_III 4

#define CAV_VIOLATES_IV 8

typedef enum CavFamily {
  CAV_FAMILY_RECT_I = 0,
  CAV_FAMILY_BALL_II = 1,
  CAV_FAMILY_ADJOINT_III = 2,
  CAV_FAMILY_TILTED_IV = 3,
  CAV_FAMILY_THM3_BALL = 4,
} CavFamily;

/**
 * Status codes; the nonzero values match the command-line exit codes.
 */
typedef enum CavStatus {
  CAV_STATUS_OK = 0,
  CAV_STATUS_INTERNAL = 1,
  CAV_STATUS_PARSE = 2,
  CAV_STATUS_UNSUPPORTED = 3,
  CAV_STATUS_RESOLUTION = 4,
  CAV_STATUS_NOT_ADMISSIBLE = 5,
  /**
   * Null pointer, out-of-range argument or failed precondition.
   */
  CAV_STATUS_INVALID_ARGUMENT = 7,
} CavStatus;

/**
 * Opaque curve handle.
 */
typedef struct CavCurve CavCurve;

typedef struct CavRegionVerdict {
  bool in_trapezium;
  bool in_triangle;
  bool in_theorem1;
  bool in_necessary;
  /**
   * `1 + (1 + omega)(1/q - 1/p)`; NaN for an infinitely flat curve.
   */
  double line_value;
  /**
   * Violated necessary conditions as `CAV_VIOLATES_*` bits.
   */
  uint32_t violated;
} CavRegionVerdict;

typedef struct CavFit {
  double slope;
  double intercept;
  /**
   * Standard error of the slope.
   */
  double std_error;
  bool consistent;
} CavFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *cav_last_error_message(void);

/**
 * Parses a curve description such as `"kind=power d=2"`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CavStatus cav_curve_parse(const char *spec, struct CavCurve **out);

/**
 * Releases a handle from [`cav_curve_parse`]; null is ignored.
 *
 * # Safety
 * `curve` must come from [`cav_curve_parse`] and not be freed twice.
 */
void cav_curve_free(struct CavCurve *curve);

/**
 * `gamma^(order)(t)` for `t` in the curve's domain.
 *
 * # Safety
 * `curve` must be a live handle and `out` a valid pointer.
 */
enum CavStatus cav_curve_eval(const struct CavCurve *curve, double t, size_t order, double *out);

/**
 * Flatness exponent at the origin; `INFINITY` for infinitely flat curves.
 *
 * # Safety
 * `curve` must be a live handle and `out` a valid pointer.
 */
enum CavStatus cav_curve_omega(const struct CavCurve *curve, double *out);

/**
 * Classifies `(1/p, 1/q)`; `omega` may be `INFINITY`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum CavStatus cav_region_classify(double inv_p,
                                   double inv_q,
                                   double omega,
                                   struct CavRegionVerdict *out);

/**
 * Exponent of `eps` predicted for a family at `(1/p, 1/q)`.
 *
 * # Safety
 * `curve` must be a live handle and `out` a valid pointer.
 */
enum CavStatus cav_predicted_exponent(enum CavFamily family,
                                      double inv_p,
                                      double inv_q,
                                      const struct CavCurve *curve,
                                      double *out);

/**
 * Least-squares fit of `ln ratio` against `ln eps` over `n >= 4` samples
 * with `eps` strictly decreasing geometrically.
 *
 * # Safety
 * `eps` and `ratio` must point to `n` values and `out` must be valid.
 */
enum CavStatus cav_fit_exponent(const double *eps,
                                const double *ratio,
                                size_t n,
                                double predicted,
                                double tolerance,
                                struct CavFit *out);

/**
 * Dyadic series `sum_{j<=0} 2^j |2^j gamma(2^j)|^(1/q - 1/p)` summed down
 * to `j_min <= -32`. Sets `*convergent` and, when convergent, `*value`
 * (NaN otherwise).
 *
 * # Safety
 * `curve` must be a live handle; `convergent` and `value` valid pointers.
 */
enum CavStatus cav_series_lemma21(const struct CavCurve *curve,
                                  double inv_p,
                                  double inv_q,
                                  int32_t j_min,
                                  bool *convergent,
                                  double *value);

/**
 * Solves `Gamma_j'(t0) = -xi1/xi2` on `(1/2, 2)`.
 *
 * # Safety
 * `curve` must be a live handle and `out` a valid pointer.
 */
enum CavStatus cav_critical_point(const struct CavCurve *curve,
                                  int32_t j,
                                  double xi1,
                                  double xi2,
                                  double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAVLAB_H */
