#ifndef ADVSURV_H
#define ADVSURV_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  ADVSURV_STATUS_OK = 0,
  ADVSURV_STATUS_NULL_POINTER = 1,
  ADVSURV_STATUS_INVALID_ARGUMENT = 2,
  ADVSURV_STATUS_IO = 3,
  ADVSURV_STATUS_DATA = 4,
  ADVSURV_STATUS_NUMERICAL = 5,
  ADVSURV_STATUS_PANIC = 6,
} AdvsurvStatus;

typedef enum {
  ADVSURV_FAMILY_WEIBULL = 0,
  ADVSURV_FAMILY_LOG_LOGISTIC = 1,
  ADVSURV_FAMILY_LOG_NORMAL = 2,
} AdvsurvFamily;

/**
 * A fitted accelerated failure time model.
 */
typedef struct AdvsurvModel AdvsurvModel;

/**
 * A loaded trial log.
 */
typedef struct AdvsurvTrials AdvsurvTrials;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *advsurv_last_error(void);

/**
 * Load a JSONL trial log.
 *
 * # Safety
 * `path` must be a nul-terminated string and `out` a valid pointer.
 */
AdvsurvStatus advsurv_trials_load(const char *path, AdvsurvTrials **out);

/**
 * Number of records, including failed trials.
 *
 * # Safety
 * `trials` must come from [`advsurv_trials_load`]; `out` must be valid.
 */
AdvsurvStatus advsurv_trials_len(const AdvsurvTrials *trials, size_t *out);

/**
 * Per-sample training time of record `index`.
 *
 * # Safety
 * `trials` must come from [`advsurv_trials_load`]; `out` must be valid.
 */
AdvsurvStatus advsurv_trials_train_time_per_sample(const AdvsurvTrials *trials,
                                                   size_t index,
                                                   double *out);

/**
 * Raw covariate row of record `index` in the column order of `model`.
 * `out` must hold [`advsurv_model_n_covariates`] values.
 *
 * # Safety
 * Handles must be live; `out` must point to `len` writable doubles.
 */
AdvsurvStatus advsurv_trials_covariates(const AdvsurvTrials *trials,
                                        const AdvsurvModel *model,
                                        size_t index,
                                        double *out,
                                        size_t len);

/**
 * # Safety
 * `trials` must come from [`advsurv_trials_load`] or be NULL.
 */
void advsurv_trials_free(AdvsurvTrials *trials);

/**
 * Fit an AFT model to the successful trials with default options.
 *
 * # Safety
 * `trials` must be live and `out` valid.
 */
AdvsurvStatus advsurv_aft_fit(const AdvsurvTrials *trials,
                              AdvsurvFamily family,
                              AdvsurvModel **out);

/**
 * Load a model JSON file.
 *
 * # Safety
 * `path` must be a nul-terminated string and `out` valid.
 */
AdvsurvStatus advsurv_model_load(const char *path, AdvsurvModel **out);

/**
 * # Safety
 * `model` must be live and `path` a nul-terminated string.
 */
AdvsurvStatus advsurv_model_save(const AdvsurvModel *model, const char *path);

/**
 * # Safety
 * `model` must come from this library or be NULL.
 */
void advsurv_model_free(AdvsurvModel *model);

/**
 * # Safety
 * `model` must be live and `out` valid.
 */
AdvsurvStatus advsurv_model_n_covariates(const AdvsurvModel *model, size_t *out);

/**
 * `S(t | x)` for a raw covariate row `x` of length `n_x`.
 *
 * # Safety
 * `model` must be live, `x` must point to `n_x` doubles, `out` valid.
 */
AdvsurvStatus advsurv_model_survival(const AdvsurvModel *model,
                                     const double *x,
                                     size_t n_x,
                                     double t,
                                     double *out);

/**
 * `E[T | x]` integrated up to `t_star`; pass a value `<= 0` for the longest
 * time seen in fitting.
 *
 * # Safety
 * `model` must be live, `x` must point to `n_x` doubles, `out` valid.
 */
AdvsurvStatus advsurv_model_expected_survival_time(const AdvsurvModel *model,
                                                   const double *x,
                                                   size_t n_x,
                                                   double t_star,
                                                   double *out);

/**
 * `exp(theta . z)` for a raw covariate row.
 *
 * # Safety
 * `model` must be live, `x` must point to `n_x` doubles, `out` valid.
 */
AdvsurvStatus advsurv_model_acceleration_factor(const AdvsurvModel *model,
                                                const double *x,
                                                size_t n_x,
                                                double *out);

/**
 * TRASH score `t_train_per_sample / E[T]`; `broken` is set when it exceeds 1.
 *
 * # Safety
 * `score` and `broken` must be valid.
 */
AdvsurvStatus advsurv_trash_score(double t_train_per_sample,
                                  double expected_survival_time,
                                  double *score,
                                  bool *broken);

/**
 * Rental cost in USD and energy in joules for `seconds` of compute.
 *
 * # Safety
 * `cost_usd` and `energy_joules` must be valid.
 */
AdvsurvStatus advsurv_project_cost_energy(double seconds,
                                          double cost_per_hour,
                                          double power_watts,
                                          double *cost_usd,
                                          double *energy_joules);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ADVSURV_H */
