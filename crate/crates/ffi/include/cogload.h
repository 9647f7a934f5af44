#ifndef COGLOAD_H
#define COGLOAD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  COGLOAD_STATUS_OK = 0,
  COGLOAD_STATUS_INVALID_ARGUMENT = 1,
  COGLOAD_STATUS_INCONSISTENT_INPUT = 2,
  COGLOAD_STATUS_EMPTY_AFTER_REDUCTION = 3,
  COGLOAD_STATUS_NUMERICAL_FAILURE = 4,
  COGLOAD_STATUS_NULL_POINTER = 5,
  COGLOAD_STATUS_INVALID_UTF8 = 6,
  COGLOAD_STATUS_INDEX_OUT_OF_RANGE = 7,
  COGLOAD_STATUS_PANIC = 8,
  COGLOAD_STATUS_OTHER = 9,
} CogloadStatus;

/**
 * A finished calibration.
 */
typedef struct CogloadCalibration CogloadCalibration;

/**
 * Accumulates learner-item responses.
 */
typedef struct CogloadMatrixBuilder CogloadMatrixBuilder;

/**
 * Calibration settings; obtain defaults from
 * [`cogload_calibration_config_default`].
 */
typedef struct {
  size_t max_iterations;
  double convergence_tolerance;
  double newton_damping;
  double theta_bound;
} CogloadCalibrationConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; empty when none. Valid until
 * the next failing call on the same thread.
 */
const char *cogload_last_error_message(void);

/**
 * Writes `1 / (1 + exp(-(theta - b)))` to `out`.
 *
 * # Safety
 * `out` must be null or valid for a write of one `double`.
 */
CogloadStatus cogload_rasch_probability(double theta, double b, double *out);

CogloadMatrixBuilder *cogload_matrix_builder_new(void);

/**
 * Adds one response. A repeated learner-item pair is rejected.
 *
 * # Safety
 * `builder` must come from [`cogload_matrix_builder_new`]; the ids must be
 * null or NUL-terminated strings.
 */
CogloadStatus cogload_matrix_builder_add(CogloadMatrixBuilder *builder,
                                         const char *learner_id,
                                         const char *item_id,
                                         bool correct);

/**
 * Number of responses added so far; 0 for a null builder.
 *
 * # Safety
 * `builder` must be null or come from [`cogload_matrix_builder_new`].
 */
size_t cogload_matrix_builder_len(const CogloadMatrixBuilder *builder);

/**
 * # Safety
 * `builder` must be null or come from [`cogload_matrix_builder_new`] and not
 * have been freed.
 */
void cogload_matrix_builder_free(CogloadMatrixBuilder *builder);

CogloadCalibrationConfig cogload_calibration_config_default(void);

/**
 * Runs joint maximum likelihood on the builder's responses. The builder is
 * left untouched and may be reused or freed. On success `*out` receives a
 * handle to release with [`cogload_calibration_free`].
 *
 * # Safety
 * `builder` must come from [`cogload_matrix_builder_new`]; `config` must be
 * null (defaults) or point to a valid config; `out` must be valid for one
 * pointer write.
 */
CogloadStatus cogload_calibrate(const CogloadMatrixBuilder *builder,
                                const CogloadCalibrationConfig *config,
                                CogloadCalibration **out);

/**
 * # Safety
 * `cal` must be null or a live handle from [`cogload_calibrate`].
 */
size_t cogload_calibration_item_count(const CogloadCalibration *cal);

/**
 * # Safety
 * `cal` must be null or a live handle from [`cogload_calibrate`].
 */
size_t cogload_calibration_learner_count(const CogloadCalibration *cal);

/**
 * # Safety
 * `cal` must be null or a live handle from [`cogload_calibrate`].
 */
size_t cogload_calibration_exclusion_count(const CogloadCalibration *cal);

/**
 * Item id at `index`, or null when out of range.
 *
 * # Safety
 * `cal` must be null or a live handle from [`cogload_calibrate`].
 */
const char *cogload_calibration_item_id(const CogloadCalibration *cal, size_t index);

/**
 * Learner id at `index`, or null when out of range.
 *
 * # Safety
 * `cal` must be null or a live handle from [`cogload_calibrate`].
 */
const char *cogload_calibration_learner_id(const CogloadCalibration *cal, size_t index);

/**
 * # Safety
 * `cal` must be a live handle; `out` valid for one `double` write.
 */
CogloadStatus cogload_calibration_item_difficulty(const CogloadCalibration *cal,
                                                  size_t index,
                                                  double *out);

/**
 * # Safety
 * `cal` must be a live handle; `out` valid for one `double` write.
 */
CogloadStatus cogload_calibration_item_standard_error(const CogloadCalibration *cal,
                                                      size_t index,
                                                      double *out);

/**
 * # Safety
 * `cal` must be a live handle; `out` valid for one `double` write.
 */
CogloadStatus cogload_calibration_item_responses(const CogloadCalibration *cal,
                                                 size_t index,
                                                 size_t *out);

/**
 * # Safety
 * `cal` must be a live handle; `out` valid for one `double` write.
 */
CogloadStatus cogload_calibration_learner_ability(const CogloadCalibration *cal,
                                                  size_t index,
                                                  double *out);

/**
 * # Safety
 * `cal` must be null or a live handle from [`cogload_calibrate`].
 */
bool cogload_calibration_converged(const CogloadCalibration *cal);

/**
 * # Safety
 * `cal` must be null or a live handle from [`cogload_calibrate`].
 */
size_t cogload_calibration_iterations(const CogloadCalibration *cal);

/**
 * Final joint log-likelihood; NaN for a null handle.
 *
 * # Safety
 * `cal` must be null or a live handle from [`cogload_calibrate`].
 */
double cogload_calibration_log_likelihood(const CogloadCalibration *cal);

/**
 * # Safety
 * `cal` must be null or a live handle that has not been freed.
 */
void cogload_calibration_free(CogloadCalibration *cal);

/**
 * Min-max standardizes `n` values into `out` (which may alias `values`).
 * A constant series maps to 0.5.
 *
 * # Safety
 * `values` and `out` must be valid for `n` doubles.
 */
CogloadStatus cogload_minmax_standardize(const double *values, size_t n, double *out);

/**
 * Writes `diff_std + el_std` to `raw` and half of it to `standardized`.
 *
 * # Safety
 * `raw` and `standardized` must be valid for one `double` write each.
 */
CogloadStatus cogload_combined_load(double diff_std,
                                    double el_std,
                                    double *raw,
                                    double *standardized);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COGLOAD_H */
