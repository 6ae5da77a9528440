#ifndef CONFOCAL_H
#define CONFOCAL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  CONFOCAL_STATUS_OK = 0,
  CONFOCAL_STATUS_NULL_POINTER = 1,
  CONFOCAL_STATUS_INVALID_ARGUMENT = 2,
  CONFOCAL_STATUS_SINGULARITY = 3,
  CONFOCAL_STATUS_SYMMETRIC_SPEC = 4,
  CONFOCAL_STATUS_BUFFER_TOO_SMALL = 5,
  CONFOCAL_STATUS_PANIC = 6,
} ConfocalStatus;

/**
 * Opaque handle to a billiard table.
 */
typedef struct ConfocalBilliard ConfocalBilliard;

/**
 * Opaque handle to a flow.
 */
typedef struct ConfocalSystem ConfocalSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t confocal_last_error(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *confocal_version(void);

/**
 * Create a flow. `kind` is one of `jacobi`, `double-jacobi`,
 * `complex-jacobi`, `jacobi-rosochatius`, `separable-hierarchy`,
 * `free-oscillator`, `free-jr`. `sigmas` (length `m`) is used by the
 * hierarchy only; `mu` may be null for all zeros.
 *
 * # Safety
 * Pointers must be valid for the given lengths; `out` must be writable.
 */
ConfocalStatus confocal_system_new(const char *kind,
                                   const double *axes,
                                   size_t n,
                                   double sigma,
                                   const double *sigmas,
                                   size_t m,
                                   const double *mu,
                                   ConfocalSystem **out);

/**
 * # Safety
 * `sys` must be null or a handle from [`confocal_system_new`] not yet freed.
 */
void confocal_system_free(ConfocalSystem *sys);

/**
 * Length of the `x` (and `y`) block of a state of this flow.
 *
 * # Safety
 * `sys` must be a live handle.
 */
size_t confocal_system_state_len(const ConfocalSystem *sys);

/**
 * Integrate from `(x, y)` over time `t` with step close to `h`; writes the
 * final state to `out_x`, `out_y` (each of the state length).
 *
 * # Safety
 * Arrays must be valid for the state length.
 */
ConfocalStatus confocal_integrate(const ConfocalSystem *sys,
                                  const double *x,
                                  const double *y,
                                  double t,
                                  double h,
                                  double *out_x,
                                  double *out_y);

/**
 * `det L(λ)` of the 2×2 Lax matrix at `(x, y)`.
 *
 * # Safety
 * Arrays must be valid for the state length; `out` must be writable.
 */
ConfocalStatus confocal_det_l(const ConfocalSystem *sys,
                              const double *x,
                              const double *y,
                              double lambda,
                              double *out);

/**
 * `‖dL/dt - [L, A]‖` by central differences with step `h`; `big` selects
 * the `(n+1)`-dimensional pair.
 *
 * # Safety
 * Arrays must be valid for the state length; `out` must be writable.
 */
ConfocalStatus confocal_lax_residual(const ConfocalSystem *sys,
                                     const double *x,
                                     const double *y,
                                     bool big,
                                     double lambda,
                                     double h,
                                     double *out);

/**
 * Create a billiard in `<A^-1 x, x> <= 1`; `mu` may be null.
 *
 * # Safety
 * Pointers must be valid for `n` entries; `out` must be writable.
 */
ConfocalStatus confocal_billiard_new(const double *axes,
                                     size_t n,
                                     double sigma,
                                     const double *mu,
                                     ConfocalBilliard **out);

/**
 * # Safety
 * `b` must be null or a handle from [`confocal_billiard_new`] not yet freed.
 */
void confocal_billiard_free(ConfocalBilliard *b);

/**
 * One step of the explicit billiard map from the impact `(x, y)`.
 *
 * # Safety
 * Arrays must be valid for the billiard dimension.
 */
ConfocalStatus confocal_billiard_step(const ConfocalBilliard *b,
                                      const double *x,
                                      const double *y,
                                      double *out_x,
                                      double *out_y);

/**
 * One bounce computed by integrating the free flight and reflecting.
 *
 * # Safety
 * Arrays must be valid for the billiard dimension.
 */
ConfocalStatus confocal_billiard_oracle_step(const ConfocalBilliard *b,
                                             const double *x,
                                             const double *y,
                                             double *out_x,
                                             double *out_y);

/**
 * Caustic parameters of the segment leaving `(x, y)`, ascending. Writes
 * the count to `count`; fails with `BufferTooSmall` if `cap` is too small.
 *
 * # Safety
 * `x`, `y` must be valid for the billiard dimension, `out` for `cap`
 * entries, and `count` writable.
 */
ConfocalStatus confocal_billiard_caustics(const ConfocalBilliard *b,
                                          const double *x,
                                          const double *y,
                                          double *out,
                                          size_t cap,
                                          size_t *count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONFOCAL_H */
