#ifndef TOPOQFI_H
#define TOPOQFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define TQ_OK 0

#define TQ_ERR_NULL_POINTER 1

#define TQ_ERR_INVALID_UTF8 2

#define TQ_ERR_SHAPE_MISMATCH 3

#define TQ_ERR_NON_HERMITIAN 4

#define TQ_ERR_CONVERGENCE 5

#define TQ_ERR_INVALID_OCCUPATION 6

#define TQ_ERR_INVALID_SIZE 7

#define TQ_ERR_INVALID_PARAMS 8

#define TQ_ERR_NEGATIVE_RESULT 9

#define TQ_ERR_DEGENERATE_DISTRIBUTION 10

#define TQ_ERR_STATE_CROSSING 11

#define TQ_ERR_INVALID_Z 12

#define TQ_ERR_INVALID_R 13

#define TQ_ERR_OUTSIDE_TOPOLOGICAL_PHASE 14

#define TQ_ERR_NO_GAP_ISOLATION 15

#define TQ_ERR_NO_LOWER_BAND 16

#define TQ_ERR_NON_MONOTONIC 17

#define TQ_ERR_NOT_A_PROJECTOR 18

#define TQ_ERR_ALL_EXCLUDED 19

#define TQ_ERR_ODD_L 20

#define TQ_ERR_AT_CRITICALITY 21

#define TQ_ERR_GAPLESS_INPUT 22

#define TQ_ERR_DIMENSION_MISMATCH 23

#define TQ_ERR_ILL_CONDITIONED 24

#define TQ_ERR_FLAT_LIKELIHOOD 25

#define TQ_ERR_INVALID_CONFIG 26

#define TQ_ERR_PANIC 99

/**
 * Bits of `TqFit::flags`.
 */
#define TQ_FIT_DEGENERATE 1

#define TQ_FIT_AT_BOUNDARY 2

/**
 * Opaque model handle.
 */
typedef struct TqModel TqModel;

typedef struct TqEdgeInfo {
  double qfi;
  double cfi_position;
  /**
   * 1 when the selected state is an edge state, 0 for the bulk fallback.
   */
  int32_t is_edge;
} TqEdgeInfo;

typedef struct TqFit {
  double a;
  double b;
  double c;
  double rms_residual;
  double relative_residual;
  uint32_t flags;
} TqFit;

typedef struct TqEstimate {
  double lambda_hat_mean;
  double sample_variance;
  double predicted_crb;
  double ratio;
  size_t run_failures;
} TqEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a model from its identifier ("ssh", "chern-wire", "chern-bloch",
 * "band-inversion") and `n_params` optional named parameters.
 *
 * # Safety
 * `id` must be a NUL-terminated string; `keys` and `values` must point to
 * `n_params` entries (they may be null when `n_params` is 0); `out` must be
 * writable.
 */
int32_t tq_model_new(const char *id,
                     const char *const *keys,
                     const double *values,
                     size_t n_params,
                     struct TqModel **out);

/**
 * # Safety
 * `model` must come from `tq_model_new` and not have been freed; null is
 * ignored.
 */
void tq_model_free(struct TqModel *model);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`) and returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be writable for `len` bytes or null.
 */
size_t tq_last_error_message(char *buf, size_t len);

/**
 * QFI and position CFI of the edge (or fallback bulk) state, by central
 * difference with the default step.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
int32_t tq_edge_qfi(const struct TqModel *model, double lambda, size_t l, struct TqEdgeInfo *out);

/**
 * Edge QFI of the SSH chain from the closed form (|λ| < 1).
 *
 * # Safety
 * `out` must be writable.
 */
int32_t tq_ssh_edge_qfi(double lambda, size_t l, double *out);

/**
 * QFI of the normalized geometric state with real ratio r and ∂r = `dr`.
 *
 * # Safety
 * `out` must be writable.
 */
int32_t tq_phi_z_qfi(double r, double dr, size_t l, double *out);

/**
 * (L² − 1)(∂r² + ∂θ²)/3.
 */
double tq_tpt_limit(double dr, double dtheta, size_t l);

/**
 * Σ_k lower-band QFI over the periodic grid.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
int32_t tq_pbc_qfi(const struct TqModel *model, double lambda, size_t l, double *out);

/**
 * Half-filled open-boundary ground-state QFI via the projector route.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
int32_t tq_obc_qfi(const struct TqModel *model, double lambda, size_t l, double *out);

/**
 * # Safety
 * `out` must be writable.
 */
int32_t tq_ssh_tpt_closed_form(size_t l, double *out);

/**
 * # Safety
 * `out` must be writable.
 */
int32_t tq_ssh_continuum_limit(double lambda, double *out);

/**
 * # Safety
 * `out` must be writable.
 */
int32_t tq_chern_tpt_sum(size_t l, double t1, double t2, double *out);

/**
 * # Safety
 * `out` must be writable.
 */
int32_t tq_band_inversion_lowest_modes(size_t l,
                                       double alpha,
                                       double lambda,
                                       double lambda_c,
                                       double *out);

/**
 * Fits values ≈ a·L^b + c with b restricted to [b_lo, b_hi].
 *
 * # Safety
 * `sizes` and `values` must point to `n` entries; `out` must be writable.
 */
int32_t tq_fit_power_law(const size_t *sizes,
                         const double *values,
                         size_t n,
                         double b_lo,
                         double b_hi,
                         struct TqFit *out);

/**
 * Monte-Carlo MLE study: `reps` experiments of `samples` position
 * measurements at `lambda_true`, estimates restricted to [lo, hi].
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
int32_t tq_estimate(const struct TqModel *model,
                    double lambda_true,
                    size_t l,
                    uint64_t samples,
                    size_t reps,
                    uint64_t seed,
                    double lo,
                    double hi,
                    struct TqEstimate *out);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tq_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TOPOQFI_H */
