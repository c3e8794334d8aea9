#ifndef QCAT_H
#define QCAT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QcatStatus {
  QCAT_STATUS_OK = 0,
  QCAT_STATUS_NULL_POINTER = 1,
  QCAT_STATUS_INPUT_ERROR = 2,
  QCAT_STATUS_NUMERICAL_ERROR = 3,
  QCAT_STATUS_INVALID_UTF8 = 4,
  QCAT_STATUS_BUFFER_TOO_SMALL = 5,
  QCAT_STATUS_PANIC = 6,
} QcatStatus;

/**
 * Opaque model handle.
 */
typedef struct QcatModel QcatModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread (empty after success).
 * Valid until the next `qcat_*` call on the same thread.
 */
const char *qcat_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qcat_version(void);

/**
 * Parses a model description (JSON) into a new handle.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum QcatStatus qcat_model_from_json(const char *json, struct QcatModel **out);

/**
 * # Safety
 * `model` must come from `qcat_model_from_json` and not be used afterwards.
 */
void qcat_model_free(struct QcatModel *model);

/**
 * Matrix dimension, or 0 for a null handle.
 *
 * # Safety
 * `model` must be a live handle or null.
 */
size_t qcat_model_dim(const struct QcatModel *model);

/**
 * Binds parameter `name` to the expression `value` (`NULL` frees it).
 *
 * # Safety
 * `model` must be a live handle; strings NUL-terminated.
 */
enum QcatStatus qcat_model_set_param(struct QcatModel *model, const char *name, const char *value);

/**
 * Eigenvalues of a fully bound model, sorted by real part, into two
 * caller arrays of length `len >= dim`.
 *
 * # Safety
 * `re` and `im` must each point to `len` writable doubles.
 */
enum QcatStatus qcat_eigenvalues(const struct QcatModel *model, double *re, double *im, size_t len);

/**
 * Secular polynomial as JSON, optionally shifted by the expression `shift`.
 * Free the result with `qcat_string_free`.
 *
 * # Safety
 * `model` live; `shift` NUL-terminated or null; `out` writable.
 */
enum QcatStatus qcat_secular_json(const struct QcatModel *model, const char *shift, char **out);

/**
 * Maximal exceptional points of the free parameters as a JSON array.
 *
 * # Safety
 * `model` live; `out` writable.
 */
enum QcatStatus qcat_mep_json(const struct QcatModel *model, char **out);

/**
 * Spectral metric with weights `kappa` (`NULL` for all ones) as JSON.
 *
 * # Safety
 * `model` live; `kappa` null or `len` readable doubles; `out` writable.
 */
enum QcatStatus qcat_metric_json(const struct QcatModel *model,
                                 const double *kappa,
                                 size_t len,
                                 char **out);

/**
 * # Safety
 * `s` must come from a `qcat_*_json` call and not be used afterwards.
 */
void qcat_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QCAT_H */
