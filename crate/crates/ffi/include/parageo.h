#ifndef PARAGEO_H
#define PARAGEO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum ParageoStatus {
  PARAGEO_STATUS_OK = 0,
  PARAGEO_STATUS_NULL_POINTER = 1,
  PARAGEO_STATUS_INVALID_ARGUMENT = 2,
  PARAGEO_STATUS_PARSE_ERROR = 3,
  PARAGEO_STATUS_DEGENERATE_METRIC = 4,
  PARAGEO_STATUS_DOMAIN_ERROR = 5,
  PARAGEO_STATUS_NUMERICAL_ABORT = 6,
  PARAGEO_STATUS_BUFFER_TOO_SMALL = 7,
  PARAGEO_STATUS_PANIC = 8,
} ParageoStatus;

/**
 * Curve families for [`parageo_integrate`]. The initial state is
 * `[x, v]` for `Geodesic` and `[x, v, w]` otherwise, where `w` is the Weyl
 * 1-form, the covariant acceleration or the projective 1-form.
 */
typedef enum ParageoSystem {
  PARAGEO_SYSTEM_CONFORMAL_COUPLED = 0,
  PARAGEO_SYSTEM_CONFORMAL_ODE3 = 1,
  PARAGEO_SYSTEM_PROJECTIVE_COUPLED = 2,
  PARAGEO_SYSTEM_GEODESIC = 3,
} ParageoSystem;

/**
 * Opaque metric handle.
 */
typedef struct ParageoMetric ParageoMetric;

/**
 * Opaque trajectory handle.
 */
typedef struct ParageoTrajectory ParageoTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or an empty string.
 * The pointer stays valid until the next library call on the same thread.
 */
const char *parageo_last_error(void);

/**
 * Build a builtin metric: `euclidean`, `minkowski`, `sphere_stereographic`,
 * `hyperbolic_halfspace`, `curved_lorentzian` or `conformal`. `f` is the
 * conformal exponent for `conformal` and must be null otherwise.
 *
 * # Safety
 * `name` and a non-null `f` must be NUL-terminated strings; `out` must be
 * writable.
 */
enum ParageoStatus parageo_metric_builtin(const char *name,
                                          size_t positive,
                                          size_t negative,
                                          const char *f,
                                          struct ParageoMetric **out);

/**
 * Build a metric from component expressions in `x1..xn`, either all `n*n`
 * entries row by row or the `n(n+1)/2` upper-triangle entries row by row.
 *
 * # Safety
 * `components` must point to `count` NUL-terminated strings; `out` must be
 * writable.
 */
enum ParageoStatus parageo_metric_from_components(size_t positive,
                                                  size_t negative,
                                                  const char *const *components,
                                                  size_t count,
                                                  struct ParageoMetric **out);

/**
 * Release a metric. Null is ignored.
 *
 * # Safety
 * `m` must come from this library and not be used afterwards.
 */
void parageo_metric_free(struct ParageoMetric *m);

/**
 * Dimension of a metric, or 0 for a null handle.
 *
 * # Safety
 * `m` must be null or a live metric handle.
 */
size_t parageo_metric_dim(const struct ParageoMetric *m);

/**
 * Point tensors at `x` (length `n`). Outputs, each optional (null skips):
 * `g` and `ricci` and `schouten` (`n*n`, row-major), `christoffel`
 * (`n^3`, `Γ^k_ij` at `(k*n + i)*n + j`), `scalar` (1). Requesting
 * `schouten` in dimension 2 fails.
 *
 * # Safety
 * Non-null pointers must reference arrays of the stated lengths.
 */
enum ParageoStatus parageo_metric_tensors(const struct ParageoMetric *m,
                                          const double *x,
                                          double *g,
                                          double *christoffel,
                                          double *ricci,
                                          double *scalar,
                                          double *schouten);

/**
 * Coordinate acceleration of the Weyl geodesic through `(x, v)` for the
 * 1-form `alpha`; all arrays have length `n`.
 *
 * # Safety
 * Pointers must reference arrays of length `n`.
 */
enum ParageoStatus parageo_weyl_acceleration(const struct ParageoMetric *m,
                                             const double *x,
                                             const double *v,
                                             const double *alpha,
                                             double *out);

/**
 * Tractor metric `H(u, w)` at `x`; tractors are `[lambda, alpha_1..n, mu]`
 * of length `n + 2`.
 *
 * # Safety
 * Pointers must reference arrays of the stated lengths.
 */
enum ParageoStatus parageo_tractor_metric(const struct ParageoMetric *m,
                                          const double *x,
                                          const double *u,
                                          const double *w,
                                          double *out);

/**
 * Integrate a curve with fixed-step RK4, recording every `stride`-th step.
 *
 * # Safety
 * `y0` must have `2n` entries for `Geodesic` and `3n` otherwise; `out`
 * must be writable.
 */
enum ParageoStatus parageo_integrate(const struct ParageoMetric *m,
                                     enum ParageoSystem system,
                                     const double *y0,
                                     double t0,
                                     double t1,
                                     double step,
                                     size_t stride,
                                     struct ParageoTrajectory **out);

/**
 * Number of samples, or 0 for a null handle.
 *
 * # Safety
 * `t` must be null or a live trajectory handle.
 */
size_t parageo_trajectory_len(const struct ParageoTrajectory *t);

/**
 * State width per sample, or 0 for a null handle.
 *
 * # Safety
 * `t` must be null or a live trajectory handle.
 */
size_t parageo_trajectory_width(const struct ParageoTrajectory *t);

/**
 * Copy sample times (`capacity >= len`) into `out`.
 *
 * # Safety
 * `out` must have room for `capacity` values.
 */
enum ParageoStatus parageo_trajectory_times(const struct ParageoTrajectory *t,
                                            double *out,
                                            size_t capacity);

/**
 * Copy states row-major (`capacity >= len * width`) into `out`.
 *
 * # Safety
 * `out` must have room for `capacity` values.
 */
enum ParageoStatus parageo_trajectory_states(const struct ParageoTrajectory *t,
                                             double *out,
                                             size_t capacity);

/**
 * Parallel-transport the tractor `u0` (length `n + 2`) along a trajectory
 * recorded with stride 1. Writes `len * (n + 2)` tractor components to
 * `tractors` and `len` values of `H(u, u)` to `h_values` (null skips).
 *
 * # Safety
 * Pointers must reference arrays of the stated lengths; `capacity` is the
 * length of `tractors`.
 */
enum ParageoStatus parageo_transport(const struct ParageoMetric *m,
                                     const struct ParageoTrajectory *t,
                                     const double *u0,
                                     double *tractors,
                                     size_t capacity,
                                     double *h_values);

/**
 * Release a trajectory. Null is ignored.
 *
 * # Safety
 * `t` must come from this library and not be used afterwards.
 */
void parageo_trajectory_free(struct ParageoTrajectory *t);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PARAGEO_H */
