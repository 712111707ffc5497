#ifndef COPO_H
#define COPO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CopoStatus {
  COPO_STATUS_OK = 0,
  COPO_STATUS_NULL_POINTER = 1,
  COPO_STATUS_INVALID_ARGUMENT = 2,
  COPO_STATUS_IO = 3,
  COPO_STATUS_DATA = 4,
  COPO_STATUS_SOLVER = 5,
  COPO_STATUS_TRAINING = 6,
  COPO_STATUS_PANIC = 7,
} CopoStatus;

/**
 * An affine predictor pair.
 */
typedef struct CopoPredictor CopoPredictor;

/**
 * The scenario days of one file.
 */
typedef struct CopoScenarios CopoScenarios;

/**
 * A power system.
 */
typedef struct CopoSystem CopoSystem;

/**
 * Training settings; start from [`copo_train_options_default`].
 */
typedef struct CopoTrainOptions {
  double alpha;
  double lambda_w;
  double lambda_r;
  /**
   * Relative gap for the solver and the stopping rule.
   */
  double gap;
  uint32_t max_iterations;
  /**
   * Upper bound on every multiplier; nonpositive means none.
   */
  double multiplier_cap;
} CopoTrainOptions;

/**
 * Outcome of a training run.
 */
typedef struct CopoTrainReport {
  uint32_t iterations;
  double lower_bound;
  double upper_bound;
  /**
   * 1 when the gap target was met.
   */
  int32_t converged;
} CopoTrainReport;

/**
 * Actual cost of one day and its breakdown, dollars.
 */
typedef struct CopoCost {
  double startup;
  double noload;
  double ed_startup;
  double ed_noload;
  double generation;
  double slack;
  double total;
} CopoCost;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on this thread.
 */
const char *copo_last_error(void);

/**
 * # Safety
 * `file` must be a NUL-terminated string; `system` a writable pointer.
 */
enum CopoStatus copo_system_load(const char *file, struct CopoSystem **system);

/**
 * # Safety
 * `system` must come from [`copo_system_load`] or be null.
 */
void copo_system_free(struct CopoSystem *system);

/**
 * Horizon, thermal units and RES units of `system`.
 *
 * # Safety
 * `system` must be a live handle; the outputs writable.
 */
enum CopoStatus copo_system_dims(const struct CopoSystem *system,
                                 size_t *hours,
                                 size_t *units,
                                 size_t *res);

/**
 * Reads scenario days; reserve columns absent from the file are sized with
 * fraction `alpha` of the load forecast.
 *
 * # Safety
 * `system` must be a live handle, `file` NUL-terminated, `scenarios` writable.
 */
enum CopoStatus copo_scenarios_load(const struct CopoSystem *system,
                                    const char *file,
                                    double alpha,
                                    struct CopoScenarios **scenarios);

/**
 * # Safety
 * `scenarios` must be a live handle or null.
 */
size_t copo_scenarios_len(const struct CopoScenarios *scenarios);

/**
 * # Safety
 * `scenarios` must come from [`copo_scenarios_load`] or be null.
 */
void copo_scenarios_free(struct CopoScenarios *scenarios);

/**
 * Predictors reproducing the raw predictions and the rule-of-thumb reserve.
 *
 * # Safety
 * `system` must be a live handle; `predictor` writable.
 */
enum CopoStatus copo_predictor_identity(const struct CopoSystem *system,
                                        double alpha,
                                        struct CopoPredictor **predictor);

/**
 * # Safety
 * `file` must be NUL-terminated; `predictor` writable.
 */
enum CopoStatus copo_predictor_load(const char *file, struct CopoPredictor **predictor);

/**
 * # Safety
 * `predictor` must be a live handle; `file` NUL-terminated.
 */
enum CopoStatus copo_predictor_save(const struct CopoPredictor *predictor, const char *file);

/**
 * RES multiplier of hour `t` and unit `j`, both zero-based.
 *
 * # Safety
 * `predictor` must be a live handle; `value` writable.
 */
enum CopoStatus copo_predictor_res_multiplier(const struct CopoPredictor *predictor,
                                              size_t t,
                                              size_t j,
                                              double *value);

/**
 * # Safety
 * `predictor` must come from this library or be null.
 */
void copo_predictor_free(struct CopoPredictor *predictor);

struct CopoTrainOptions copo_train_options_default(void);

/**
 * Trains predictors on every day of `scenarios`.
 *
 * # Safety
 * Handles must be live; `options` readable; `predictor` writable; `report`
 * writable or null.
 */
enum CopoStatus copo_train(const struct CopoSystem *system,
                           const struct CopoScenarios *scenarios,
                           const struct CopoTrainOptions *options,
                           struct CopoPredictor **predictor,
                           struct CopoTrainReport *report);

/**
 * Commits on the raw predictions of day `index` and dispatches on its
 * realization.
 *
 * # Safety
 * Handles must be live; `cost` writable.
 */
enum CopoStatus copo_run_open_loop(const struct CopoSystem *system,
                                   const struct CopoScenarios *scenarios,
                                   size_t index,
                                   struct CopoCost *cost);

/**
 * As [`copo_run_open_loop`] on the predictions of `predictor`.
 *
 * # Safety
 * Handles must be live; `cost` writable.
 */
enum CopoStatus copo_run_predictor(const struct CopoSystem *system,
                                   const struct CopoPredictor *predictor,
                                   const struct CopoScenarios *scenarios,
                                   size_t index,
                                   struct CopoCost *cost);

/**
 * Economic improvement of `c_cpo` over `c_opo`, percent.
 *
 * # Safety
 * `value` must be writable.
 */
enum CopoStatus copo_metric_ei(double c_opo, double c_cpo, double *value);

/**
 * Library version, static storage.
 */
const char *copo_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COPO_H */
