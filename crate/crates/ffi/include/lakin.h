#ifndef LAKIN_H
#define LAKIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum LakinStatus {
  LAKIN_STATUS_OK = 0,
  LAKIN_STATUS_NULL_POINTER = 1,
  LAKIN_STATUS_INVALID_ARGUMENT = 2,
  LAKIN_STATUS_IO = 3,
  LAKIN_STATUS_PARSE = 4,
  LAKIN_STATUS_VALIDATION = 5,
  LAKIN_STATUS_SEGMENTATION = 6,
  LAKIN_STATUS_NUMERIC = 7,
  LAKIN_STATUS_BUFFER_TOO_SMALL = 8,
  LAKIN_STATUS_PANIC = 9,
} LakinStatus;

/**
 * Classifier selector for [`lakin_loocv`].
 */
typedef enum LakinMethod {
  LAKIN_METHOD_NCC = 0,
  LAKIN_METHOD_KNN = 1,
  LAKIN_METHOD_SVM = 2,
} LakinMethod;

/**
 * Labelled feature rows.
 */
typedef struct LakinMatrix LakinMatrix;

/**
 * Leave-one-out evaluation result.
 */
typedef struct LakinReport LakinReport;

/**
 * Analysed trial: kinematics, segmentation and all features.
 */
typedef struct LakinTrial LakinTrial;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *lakin_version(void);

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length without
 * the terminator.
 */
size_t lakin_last_error_message(char *buf, size_t len);

/**
 * One-sided amplitude spectrum `|X_k| / N` of `x`. `out` receives
 * `n / 2 + 1` values; `out_len` reports that count and is checked against
 * the capacity given in it.
 */
enum LakinStatus lakin_amplitude_spectrum(const double *x,
                                          size_t n,
                                          double sample_rate,
                                          double *out,
                                          size_t *out_len);

/**
 * Spectrum power of `x`: mean squared amplitude over all `n` bins.
 */
enum LakinStatus lakin_spectrum_power(const double *x, size_t n, double *out);

/**
 * Loads a recording CSV and analyses it. With `labels_path` null the
 * repetitions are detected automatically.
 */
enum LakinStatus lakin_trial_analyze(const char *recording_path,
                                     const char *labels_path,
                                     double sample_rate,
                                     struct LakinTrial **out);

/**
 * Number of segmented repetitions.
 */
size_t lakin_trial_rep_count(const struct LakinTrial *trial);

/**
 * Writes the eleven trial features in canonical order (Theta, Omega, P, R,
 * their SDs, F, P_Xomega, P_Xtheta) into `out`.
 */
enum LakinStatus lakin_trial_features(const struct LakinTrial *trial, double *out, size_t len);

void lakin_trial_free(struct LakinTrial *trial);

/**
 * Builds a matrix from `n_rows × n_cols` row-major values and one UPDRS
 * score per row. Columns are named `f0`, `f1`, ...
 */
enum LakinStatus lakin_matrix_new(const double *values,
                                  size_t n_rows,
                                  size_t n_cols,
                                  const double *labels,
                                  struct LakinMatrix **out);

void lakin_matrix_free(struct LakinMatrix *matrix);

/**
 * Leave-one-out evaluation over all columns of `matrix`. `k` is used by
 * kNN, `c` by the SVM; `pca_dims` of 0 disables PCA.
 */
enum LakinStatus lakin_loocv(const struct LakinMatrix *matrix,
                             enum LakinMethod method,
                             size_t k,
                             double c,
                             size_t pca_dims,
                             struct LakinReport **out);

/**
 * Area under the error CDF, or NaN for a null report.
 */
double lakin_report_auc(const struct LakinReport *report);

/**
 * Copies the nine CDF values (errors 0, 0.5, ..., 4) into `out`.
 */
enum LakinStatus lakin_report_cdf(const struct LakinReport *report, double *out, size_t len);

/**
 * Actual and predicted score of row `row`.
 */
enum LakinStatus lakin_report_prediction(const struct LakinReport *report,
                                         size_t row,
                                         double *actual,
                                         double *predicted);

void lakin_report_free(struct LakinReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LAKIN_H */
