#ifndef PSEUDOPOWER_H
#define PSEUDOPOWER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum {
  PP_STATUS_OK = 0,
  PP_STATUS_NULL_POINTER = 1,
  PP_STATUS_INVALID_ARGUMENT = 2,
  PP_STATUS_DIMENSION_MISMATCH = 3,
  PP_STATUS_PRECISION_MISMATCH = 4,
  PP_STATUS_SINGULAR = 5,
  PP_STATUS_NON_CONVERGENCE = 6,
  PP_STATUS_TOLERANCE_UNREACHABLE = 7,
  PP_STATUS_UNSUPPORTED_BACKEND = 8,
  PP_STATUS_PARSE = 9,
  PP_STATUS_IO = 10,
  PP_STATUS_PANIC = 11,
} PpStatus;

/**
 * Vector pair used by the evolution calls.
 */
typedef enum {
  /**
   * The structured pair of the model family.
   */
  PP_VECTORS_SPECIAL = 0,
  /**
   * Seeded Gaussian unit vectors.
   */
  PP_VECTORS_RANDOM = 1,
} PpVectors;

/**
 * Opaque matrix in one of the arithmetic backends.
 */
typedef struct PpMatrix PpMatrix;

/**
 * Opaque model description.
 */
typedef struct PpModel PpModel;

/**
 * Opaque time series `f(t)`, stored exactly.
 */
typedef struct PpSeries PpSeries;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *pp_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pp_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void pp_string_free(char *s);

/**
 * Parses a model description from JSON, e.g.
 * `{"family": "block-transfer", "n": 20, "g": "2"}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
PpStatus pp_model_from_json(const char *json, PpModel **out);

/**
 * # Safety
 * `model` must come from [`pp_model_from_json`] or be null.
 */
void pp_model_free(PpModel *model);

/**
 * Builds the model matrix. `precision` is `exact`, `big:<bits>` or
 * `machine`; null selects the default backend.
 *
 * # Safety
 * Pointers must be valid; `precision` may be null.
 */
PpStatus pp_matrix_build(const PpModel *model, const char *precision, PpMatrix **out);

/**
 * Loads a matrix JSON file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
PpStatus pp_matrix_load(const char *path, PpMatrix **out);

/**
 * # Safety
 * `matrix` must come from this library or be null.
 */
void pp_matrix_free(PpMatrix *matrix);

/**
 * # Safety
 * Pointers must be valid.
 */
PpStatus pp_matrix_shape(const PpMatrix *matrix, size_t *rows, size_t *cols);

/**
 * Entry `(i, j)` rounded to double precision.
 *
 * # Safety
 * Pointers must be valid.
 */
PpStatus pp_matrix_entry(const PpMatrix *matrix, size_t i, size_t j, double *re, double *im);

/**
 * Serialises the matrix in the lossless JSON interchange format.
 *
 * # Safety
 * Pointers must be valid; free the result with [`pp_string_free`].
 */
PpStatus pp_matrix_to_json(const PpMatrix *matrix, char **out);

/**
 * `log10 s_min(zI - A)` at `z = re + i im`. Exact matrices are evaluated
 * in 256-bit floating point.
 *
 * # Safety
 * Pointers must be valid.
 */
PpStatus pp_matrix_smin_level(const PpMatrix *matrix, double re, double im, double *level);

/**
 * `f(t) = <w|A^t|v>` for `t = 0..=t_max` on an explicit matrix.
 *
 * # Safety
 * Pointers must be valid.
 */
PpStatus pp_matrix_evolve(const PpMatrix *matrix,
                          PpVectors vectors,
                          uint64_t seed,
                          uint64_t t_max,
                          PpSeries **out);

/**
 * Evolves a model, using the exponential action for `ehrenfest`.
 *
 * # Safety
 * Pointers must be valid; `precision` may be null.
 */
PpStatus pp_model_evolve(const PpModel *model,
                         const char *precision,
                         PpVectors vectors,
                         uint64_t seed,
                         uint64_t t_max,
                         PpSeries **out);

/**
 * Exact closed-form boom-bust series for the block model with special
 * vectors. `g` is a rational such as `"3/2"` or `"2"`.
 *
 * # Safety
 * `g` must be a NUL-terminated string; `out` must be writable.
 */
PpStatus pp_closed_form(size_t n, const char *g, uint64_t t_max, PpSeries **out);

/**
 * # Safety
 * `series` must come from this library or be null.
 */
void pp_series_free(PpSeries *series);

/**
 * # Safety
 * Pointers must be valid.
 */
PpStatus pp_series_len(const PpSeries *series, size_t *len);

/**
 * Sample `index` as `(t, re, im)` rounded to double precision.
 *
 * # Safety
 * Pointers must be valid.
 */
PpStatus pp_series_sample(const PpSeries *series,
                          size_t index,
                          uint64_t *t,
                          double *re,
                          double *im);

/**
 * Sample `index` as exact `p/q` strings.
 *
 * # Safety
 * Pointers must be valid; free both strings with [`pp_string_free`].
 */
PpStatus pp_series_sample_exact(const PpSeries *series, size_t index, char **re, char **im);

/**
 * Renders the series as CSV with `digits` significant digits and exact
 * `re_exact,im_exact` columns.
 *
 * # Safety
 * Pointers must be valid; free the result with [`pp_string_free`].
 */
PpStatus pp_series_to_csv(const PpSeries *series, size_t digits, char **out);

/**
 * Least-squares slope and intercept of `ln|f(t)|` over `t0..=t1`.
 * Exact zeros are skipped when `exclude_zeros` is nonzero.
 *
 * # Safety
 * Pointers must be valid.
 */
PpStatus pp_series_fit(const PpSeries *series,
                       uint64_t t0,
                       uint64_t t1,
                       bool exclude_zeros,
                       double *slope,
                       double *intercept);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* PSEUDOPOWER_H */
