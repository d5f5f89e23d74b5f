/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef SPECPATH_H
#define SPECPATH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum SpStatus {
  SP_OK = 0,
  /**
   * Null pointer or inconsistent sizes passed by the caller.
   */
  SP_ERR_ARGUMENT = 1,
  SP_ERR_CONFIG = 2,
  SP_ERR_DATA = 3,
  SP_ERR_NUMERICAL = 4,
  SP_ERR_STATE = 5,
  /**
   * Model file is malformed or of an unsupported version.
   */
  SP_ERR_SCHEMA = 6,
  SP_ERR_IO = 7,
  /**
   * Output buffer too small; the required size has been written.
   */
  SP_ERR_BUFFER = 8,
  SP_ERR_PANIC = 9,
} SpStatus;

/**
 * Opaque fitted model.
 */
typedef struct SpModel SpModel;

/**
 * Fit settings. Null array pointers (or zero lengths) select the defaults.
 */
typedef struct SpFitConfig {
  const size_t *sparsity_set;
  size_t sparsity_len;
  size_t max_paths;
  size_t block_size;
  size_t block_size_min;
  size_t block_size_max;
  const double *lambda_grid;
  size_t lambda_len;
  size_t patience;
  double min_improvement;
  bool final_resweep;
  uint64_t seed;
} SpFitConfig;

/**
 * Scores of a fit made by `sp_fit_csv`.
 */
typedef struct SpFitScores {
  double train_r2;
  double val_r2;
  double test_r2;
  double test_nrmse;
  double seconds;
} SpFitScores;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next specpath call on the same thread.
 */
const char *sp_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sp_version(void);

/**
 * Default fit settings. Array fields are null, meaning the built-in grids.
 */
struct SpFitConfig sp_fit_config_default(void);

/**
 * Fits on caller-provided training and validation matrices with `dim`
 * columns. `config` may be null for defaults.
 *
 * # Safety
 * Array pointers must be valid for the stated sizes; `out` must be writable.
 */
enum SpStatus sp_fit(const double *x_train,
                     const double *y_train,
                     size_t n_train,
                     const double *x_val,
                     const double *y_val,
                     size_t n_val,
                     size_t dim,
                     const struct SpFitConfig *config,
                     struct SpModel **out);

/**
 * Loads a CSV, splits it with the configured seed and fits, exactly like
 * the `fit` command. `scores` may be null.
 *
 * # Safety
 * `path` and `target` must be NUL-terminated; `out` must be writable.
 */
enum SpStatus sp_fit_csv(const char *path,
                         const char *target,
                         const struct SpFitConfig *config,
                         struct SpModel **out,
                         struct SpFitScores *scores);

/**
 * # Safety
 * `path` must be NUL-terminated; `out` must be writable.
 */
enum SpStatus sp_model_load(const char *path, struct SpModel **out);

/**
 * # Safety
 * `model` must come from this library; `path` must be NUL-terminated.
 */
enum SpStatus sp_model_save(const struct SpModel *model, const char *path);

/**
 * Releases a model. Null is ignored.
 *
 * # Safety
 * `model` must come from this library and not be used afterwards.
 */
void sp_model_free(struct SpModel *model);

/**
 * Number of input features, or 0 for a null handle.
 *
 * # Safety
 * `model` must be null or come from this library.
 */
size_t sp_model_dim(const struct SpModel *model);

/**
 * Number of selected paths, or 0 for a null handle.
 *
 * # Safety
 * `model` must be null or come from this library.
 */
size_t sp_model_num_paths(const struct SpModel *model);

/**
 * Penalty chosen during fitting, or NaN for a null handle.
 *
 * # Safety
 * `model` must be null or come from this library.
 */
double sp_model_lambda(const struct SpModel *model);

/**
 * Writes `n` predictions for the `n x dim` matrix `x` into `out`.
 *
 * # Safety
 * `x` must hold `n * dim` values and `out` room for `n`.
 */
enum SpStatus sp_model_predict(const struct SpModel *model,
                               const double *x,
                               size_t n,
                               size_t dim,
                               double *out);

/**
 * Writes the `n x dim` analytic gradient of the prediction, row-major.
 *
 * # Safety
 * `x` must hold `n * dim` values and `out` room for as many.
 */
enum SpStatus sp_model_sensitivity(const struct SpModel *model,
                                   const double *x,
                                   size_t n,
                                   size_t dim,
                                   double *out);

/**
 * Writes `dim` normalized importances (summing to 1) over the samples `x`.
 * `degenerate` (nullable) is set when the model ignores every input.
 *
 * # Safety
 * `x` must hold `n * dim` values and `out` room for `dim`.
 */
enum SpStatus sp_model_importance(const struct SpModel *model,
                                  const double *x,
                                  size_t n,
                                  size_t dim,
                                  double *out,
                                  bool *degenerate);

/**
 * Renders the top `top_n` terms as UTF-8 text into `buf`. `needed` (nullable)
 * receives the size including the NUL; a short buffer yields `SP_ERR_BUFFER`.
 *
 * # Safety
 * `buf` must have room for `buf_len` bytes.
 */
enum SpStatus sp_model_expression(const struct SpModel *model,
                                  size_t top_n,
                                  char *buf,
                                  size_t buf_len,
                                  size_t *needed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPECPATH_H */
