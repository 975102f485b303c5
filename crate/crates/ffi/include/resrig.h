#ifndef RESRIG_H
#define RESRIG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Boundary condition codes accepted wherever a `bc` argument appears.
 */
#define RR_BC_NEUMANN 0

#define RR_BC_DIRICHLET 1

typedef enum RrStatus {
  RR_STATUS_OK = 0,
  RR_STATUS_NULL_POINTER = 1,
  RR_STATUS_INVALID_ARGUMENT = 2,
  RR_STATUS_SOLVER_FAILURE = 3,
  RR_STATUS_OUT_OF_RANGE = 4,
  RR_STATUS_PANIC = 5,
} RrStatus;

/**
 * Opaque resonance set.
 */
typedef struct RrResonanceSet RrResonanceSet;

typedef struct RrResonance {
  double re;
  double im;
  uint64_t multiplicity;
  uint32_t mode;
} RrResonance;

/**
 * `m` and `rho` are meaningful only when `is_union_of_equal_balls` is set.
 */
typedef struct RrIdentifyResult {
  bool is_union_of_equal_balls;
  uint32_t m;
  double rho;
  double m_hat;
  double rho_hat;
  double cs_defect;
  double af_defect;
} RrIdentifyResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, including the resonance-cache revision. Static storage.
 */
const char *rr_version(void);

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next call into the library from the same thread.
 */
const char *rr_last_error_message(void);

/**
 * Resonances of the exterior of `B(rho)` in `R^d` for modes `0..=l_max`.
 * On success `*out` owns a new handle.
 */
enum RrStatus rr_ball_resonances(uint32_t d,
                                 double rho,
                                 uint32_t l_max,
                                 int32_t bc,
                                 struct RrResonanceSet **out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `set` must be null or a handle from [`rr_ball_resonances`] not yet freed.
 */
void rr_resonance_set_free(struct RrResonanceSet *set);

/**
 * Number of distinct resonances.
 */
enum RrStatus rr_resonance_set_len(const struct RrResonanceSet *set, size_t *out);

/**
 * Sum of multiplicities.
 */
enum RrStatus rr_resonance_set_total_multiplicity(const struct RrResonanceSet *set, uint64_t *out);

enum RrStatus rr_resonance_set_get(const struct RrResonanceSet *set,
                                   size_t index,
                                   struct RrResonance *out);

/**
 * Scattering determinant of `B(rho)` at `lambda`, as the product of mode
 * eigenvalues over `l <= l_max`.
 */
enum RrStatus rr_det_s_direct(uint32_t d,
                              double rho,
                              uint32_t l_max,
                              int32_t bc,
                              double lambda_re,
                              double lambda_im,
                              double *out_re,
                              double *out_im);

/**
 * `A1, A2, A3` of `m` disjoint spheres of radius `rho`, written to `out[0..3]`.
 */
enum RrStatus rr_sphere_invariants(uint32_t d, double rho, uint32_t m, double *out);

/**
 * Equal-ball decision on `invariants[0..3]` with relative tolerance `tol`.
 */
enum RrStatus rr_identify(uint32_t d,
                          const double *invariants,
                          double tol,
                          struct RrIdentifyResult *out);

/**
 * Dimension constants from a Neumann ball set of radius `radius`, with the
 * default heat pipeline; written to `alpha_out[0..3]`.
 */
enum RrStatus rr_calibrate(const struct RrResonanceSet *set, double radius, double *alpha_out);

/**
 * Boundary invariants read off `set` with constants `alpha[0..3]`; written
 * to `out[0..3]`.
 */
enum RrStatus rr_recover_invariants(const struct RrResonanceSet *set,
                                    const double *alpha,
                                    double *out);

/**
 * Gaussian-smoothed wave trace `Σ mult e^{-iλ|t|} e^{-ε²|λ|²/2}`.
 */
enum RrStatus rr_smoothed_wave_trace(const struct RrResonanceSet *set,
                                     double t,
                                     double eps,
                                     double *out_re,
                                     double *out_im);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RESRIG_H */
