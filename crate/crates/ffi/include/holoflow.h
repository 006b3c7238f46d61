#ifndef HOLOFLOW_H
#define HOLOFLOW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Kind of an equilibrium at infinity.
 */
typedef enum HfEquilibriumKind {
  HF_EQUILIBRIUM_KIND_SADDLE = 0,
  HF_EQUILIBRIUM_KIND_NODE = 1,
  HF_EQUILIBRIUM_KIND_DEGENERATE_OTHER = 2,
} HfEquilibriumKind;

/*
 Result codes. `HF_STATUS_OK` is zero; everything else is a failure.
 */
typedef enum HfStatus {
  HF_STATUS_OK = 0,
  HF_STATUS_NULL_POINTER = 1,
  HF_STATUS_INVALID_ARGUMENT = 2,
  HF_STATUS_IDENT_ZERO_EQUATOR = 3,
  HF_STATUS_DEGENERATE_EIGENVECTOR = 4,
  HF_STATUS_NOT_A_SADDLE = 5,
  HF_STATUS_NOT_UNIT = 6,
  HF_STATUS_STEP_UNDERFLOW = 7,
  HF_STATUS_TOO_MANY_STEPS = 8,
  HF_STATUS_BLOW_UP = 9,
  HF_STATUS_SINGULAR_ON_PATH = 10,
  HF_STATUS_CENTER_ON_ORBIT = 11,
  HF_STATUS_NOT_BETWEEN_CENTERS = 12,
  HF_STATUS_PARSE = 13,
  HF_STATUS_MONOTONICITY = 14,
  HF_STATUS_ANCHOR_IS_ZERO = 15,
  HF_STATUS_BRANCH_POINT_HIT = 16,
  HF_STATUS_INDEX_OUT_OF_RANGE = 17,
  HF_STATUS_PANIC = 18,
} HfStatus;

/*
 How an integration ended.
 */
typedef enum HfTermination {
  HF_TERMINATION_TIME_LIMIT = 0,
  HF_TERMINATION_ESCAPED = 1,
  HF_TERMINATION_PERIOD_CLOSED = 2,
  HF_TERMINATION_STALLED_AT_EQUILIBRIUM = 3,
  HF_TERMINATION_INTERRUPTED = 4,
} HfTermination;

/*
 Opaque result of an infinity analysis.
 */
typedef struct HfInfinity HfInfinity;

/*
 Opaque polynomial handle.
 */
typedef struct HfPoly HfPoly;

/*
 Opaque trajectory handle.
 */
typedef struct HfTrajectory HfTrajectory;

/*
 One critical point at infinity, copied out of an [`HfInfinity`].
 */
typedef struct HfEquilibrium {
  double p_x;
  double p_y;
  double alpha;
  double eig0_re;
  double eig0_im;
  double eig1_re;
  double eig1_im;
  enum HfEquilibriumKind kind;
} HfEquilibrium;

/*
 Periodic orbit summary; `periodic == 0` leaves the other fields zero.
 */
typedef struct HfOrbit {
  int32_t periodic;
  double period;
  double gap;
  double center_re;
  double center_im;
  int64_t winding;
} HfOrbit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copies the last error message of this thread into `buf` (NUL-terminated,
 truncated to `len`). Returns the full message length in bytes.

 # Safety
 `buf` must be null or point to `len` writable bytes.
 */
size_t hf_last_error(char *buf, size_t len);

/*
 Static, NUL-terminated name of a status code.
 */
const char *hf_status_name(enum HfStatus status);

/*
 Builds `Σ (re[k] + i·im[k]) z^k` from `n` ascending coefficients.

 # Safety
 `re` and `im` must point to `n` readable doubles; `out` must be writable.
 */
enum HfStatus hf_poly_new(const double *re, const double *im, size_t n, struct HfPoly **out);

/*
 # Safety
 `p` must be null or a handle from [`hf_poly_new`] not yet freed.
 */
void hf_poly_free(struct HfPoly *p);

/*
 Degree after trailing zero coefficients are dropped; 0 for a null handle.

 # Safety
 `p` must be null or a live handle.
 */
size_t hf_poly_degree(const struct HfPoly *p);

/*
 # Safety
 `p` must be a live handle; `out_re`/`out_im` must be writable.
 */
enum HfStatus hf_poly_eval(const struct HfPoly *p,
                           double re,
                           double im,
                           double *out_re,
                           double *out_im);

/*
 # Safety
 `p` must be a live polynomial handle and `out` writable.
 */
enum HfStatus hf_infinity_analyze(const struct HfPoly *p, struct HfInfinity **out);

/*
 # Safety
 `h` must be null or a live handle.
 */
void hf_infinity_free(struct HfInfinity *h);

/*
 # Safety
 `h` must be null or a live handle.
 */
size_t hf_infinity_count(const struct HfInfinity *h);

/*
 # Safety
 `h` must be null or a live handle.
 */
int32_t hf_infinity_khat(const struct HfInfinity *h);

/*
 # Safety
 `h` must be a live handle and `out` writable.
 */
enum HfStatus hf_infinity_get(const struct HfInfinity *h, size_t index, struct HfEquilibrium *out);

/*
 Integrates `z' = p(z)` from `z0` over `[t0, t1]` with relative tolerance
 `rtol` (0 selects the default).

 # Safety
 `p` must be a live handle and `out` writable.
 */
enum HfStatus hf_integrate(const struct HfPoly *p,
                           double z0_re,
                           double z0_im,
                           double t0,
                           double t1,
                           double rtol,
                           struct HfTrajectory **out);

/*
 # Safety
 `h` must be null or a live handle.
 */
void hf_trajectory_free(struct HfTrajectory *h);

/*
 # Safety
 `h` must be null or a live handle.
 */
size_t hf_trajectory_len(const struct HfTrajectory *h);

/*
 # Safety
 `h` must be a live handle; the out pointers must be writable.
 */
enum HfStatus hf_trajectory_sample(const struct HfTrajectory *h,
                                   size_t index,
                                   double *t,
                                   double *re,
                                   double *im);

/*
 # Safety
 `h` must be a live handle.
 */
enum HfTermination hf_trajectory_termination(const struct HfTrajectory *h);

/*
 # Safety
 `p` must be a live handle and `out` writable.
 */
enum HfStatus hf_detect_periodic(const struct HfPoly *p,
                                 double z0_re,
                                 double z0_im,
                                 struct HfOrbit *out);

/*
 Continues the root of the zero-product approximant built from the first
 `m/2` ordinates, anchored at `z0`, along the straight path `0 → T`.

 # Safety
 `ordinates` must point to `n` readable doubles; the out pointers must be writable.
 */
enum HfStatus hf_xi_continue(const double *ordinates,
                             size_t n,
                             size_t m,
                             double z0_re,
                             double z0_im,
                             double t_re,
                             double t_im,
                             double *out_re,
                             double *out_im);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* HOLOFLOW_H */
