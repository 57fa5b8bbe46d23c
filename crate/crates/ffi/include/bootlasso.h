#ifndef BOOTLASSO_H
#define BOOTLASSO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by fallible calls.
typedef enum BlStatus {
  BL_STATUS_OK = 0,
  BL_STATUS_NULL_POINTER = 1,
  BL_STATUS_INVALID_INPUT = 2,
  BL_STATUS_DEGENERATE_DATA = 3,
  BL_STATUS_DID_NOT_CONVERGE = 4,
  BL_STATUS_BUFFER_TOO_SMALL = 5,
  BL_STATUS_INTERNAL = 6,
} BlStatus;

// Standardized design matrix and centered response.
typedef struct BlDataset BlDataset;

// Outcome of one penalty-tuning run.
typedef struct BlTuningResult BlTuningResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer
// stays valid until the next call on this thread.
const char *bl_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *bl_version(void);

// Soft-thresholding operator `sign(z) * max(|z| - t, 0)`.
double bl_soft_threshold(double z, double t);

// Standardizes a row-major `n x p` matrix `x` and response `y` into a new
// dataset handle.
//
// # Safety
// `x` must point to `n * p` doubles, `y` to `n` doubles, `out` to writable
// storage for one pointer.
enum BlStatus bl_dataset_new(const double *x,
                             size_t n,
                             size_t p,
                             const double *y,
                             struct BlDataset **out);

// # Safety
// `data` must be NULL or a handle from [`bl_dataset_new`] not yet freed.
void bl_dataset_free(struct BlDataset *data);

// Number of observations, or 0 for NULL.
//
// # Safety
// `data` must be NULL or a live dataset handle.
size_t bl_dataset_n(const struct BlDataset *data);

// Number of covariates, or 0 for NULL.
//
// # Safety
// `data` must be NULL or a live dataset handle.
size_t bl_dataset_p(const struct BlDataset *data);

// Tunes the penalty with `b` weighted-bootstrap replicates of `scheme`
// (`beta:a,b`, `kfold:k`, `paired` or `mofn:f`) on the default 100-point
// grid, computing both the minimum and one-SE selections.
//
// # Safety
// `data` must be a live dataset handle, `scheme` a NUL-terminated string and
// `out` writable storage for one pointer.
enum BlStatus bl_tune(const struct BlDataset *data,
                      const char *scheme,
                      size_t b,
                      uint64_t seed,
                      struct BlTuningResult **out);

// # Safety
// `result` must be NULL or a handle from [`bl_tune`] not yet freed.
void bl_result_free(struct BlTuningResult *result);

// Penalty chosen by the minimum rule.
//
// # Safety
// `result` must be a live result handle and `out` writable.
enum BlStatus bl_result_lambda_min(const struct BlTuningResult *result, double *out);

// Penalty chosen by the one-standard-error rule; `InvalidInput` when the
// rule was not computed (fewer than two replicates).
//
// # Safety
// `result` must be a live result handle and `out` writable.
enum BlStatus bl_result_lambda_one_se(const struct BlTuningResult *result, double *out);

// Realized mean training-weight fraction.
//
// # Safety
// `result` must be a live result handle and `out` writable.
enum BlStatus bl_result_rho(const struct BlTuningResult *result, double *out);

// Number of grid points, or 0 for NULL.
//
// # Safety
// `result` must be NULL or a live result handle.
size_t bl_result_grid_len(const struct BlTuningResult *result);

// Copies the λ grid and the total test-weighted error into caller buffers
// of length `len`, which must be at least [`bl_result_grid_len`].
//
// # Safety
// `lambdas` and `mspe` must each point to `len` writable doubles.
enum BlStatus bl_result_curve(const struct BlTuningResult *result,
                              double *lambdas,
                              double *mspe,
                              size_t len);

// Writes the 0-based active-set indices at the minimum-rule penalty into
// `indices` (capacity `cap`) and the set size into `len`. With a NULL
// `indices` only the size is reported.
//
// # Safety
// `indices` must be NULL or point to `cap` writable entries; `len` writable.
enum BlStatus bl_result_active_set_min(const struct BlTuningResult *result,
                                       size_t *indices,
                                       size_t cap,
                                       size_t *len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BOOTLASSO_H */
