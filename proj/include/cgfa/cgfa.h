/* C interface to the contaminated Gaussian factor analysis library.
 *
 * Every function returning cgfa_status leaves a thread-local message behind on
 * failure, readable through cgfa_last_error(). Handles are opaque; each *_free
 * accepts NULL. Row indices are 0-based.
 */
#ifndef CGFA_CGFA_H
#define CGFA_CGFA_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CGFA_API __declspec(dllexport)
#else
#define CGFA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cgfa_status {
  CGFA_OK = 0,
  CGFA_ERR_INVALID_ARGUMENT = 1,
  CGFA_ERR_NOT_POSITIVE_DEFINITE = 2,
  CGFA_ERR_NON_FINITE_OBJECTIVE = 3,
  CGFA_ERR_INVALID_SUPPORT = 4,
  CGFA_ERR_DEGENERATE_SCATTER = 5,
  CGFA_ERR_SINGULAR_R = 6,
  CGFA_ERR_INVALID_RANK = 7,
  CGFA_ERR_EMPTY_COMPONENT = 8,
  CGFA_ERR_INVALID_NESTING = 9,
  CGFA_ERR_ALL_CANDIDATES_FAILED = 10,
  CGFA_ERR_PARSE = 11,
  CGFA_ERR_NON_NUMERIC_COLUMN = 12,
  CGFA_ERR_SCHEMA_MISMATCH = 13,
  CGFA_ERR_IO = 14,
  CGFA_ERR_DIMENSION_UNSUPPORTED = 15,
  CGFA_ERR_DATASET_UNAVAILABLE = 16,
  CGFA_ERR_INTERNAL = 99
} cgfa_status;

typedef enum cgfa_family {
  CGFA_FAMILY_GAUSSIAN = 0,
  CGFA_FAMILY_CN = 1,
  CGFA_FAMILY_GFA = 2,
  CGFA_FAMILY_CNFA = 3,
  CGFA_FAMILY_MGFA = 4,
  CGFA_FAMILY_MCNFA = 5
} cgfa_family;

typedef struct cgfa_dataset cgfa_dataset;
typedef struct cgfa_model cgfa_model;
typedef struct cgfa_selection cgfa_selection;
typedef struct cgfa_study cgfa_study;

typedef struct cgfa_fit_options {
  double alpha_min;    /* lower bound on alpha, default 0.5 */
  double epsilon;      /* Aitken tolerance, default 0.001 */
  int max_iter;        /* default 1000 */
  double eta_max;      /* upper bound on eta, default 1000 */
  uint64_t seed;       /* k-means seed, default 1 */
  int kmeans_restarts; /* default 10 */
  unsigned threads;    /* grid searches only; 0 = all cores, default 1 */
} cgfa_fit_options;

typedef struct cgfa_score {
  cgfa_family family;
  int G;
  int q;
  int fitted;
  double loglik;
  size_t n_params;
  size_t n;
  double bic;
} cgfa_score;

typedef struct cgfa_study_row {
  double value;
  int ok;
  int best_g;
  int best_q;
  double bic;
  int misclassified; /* -1 without labels */
  int perturbed_bad;
  double perturbed_eta;
} cgfa_study_row;

CGFA_API const char* cgfa_version(void);
CGFA_API const char* cgfa_last_error(void);
CGFA_API const char* cgfa_status_name(cgfa_status status);
CGFA_API const char* cgfa_family_name(cgfa_family family);
CGFA_API cgfa_status cgfa_family_parse(const char* name, cgfa_family* out);
CGFA_API void cgfa_fit_options_default(cgfa_fit_options* options);

/* Datasets. label_column may be NULL (auto-detect a leading text column). */
CGFA_API cgfa_status cgfa_dataset_load_csv(const char* path, char delimiter, const char* label_column,
                                           int standardize, cgfa_dataset** out);
CGFA_API cgfa_status cgfa_dataset_load_bundled(const char* name, int standardize, cgfa_dataset** out);
CGFA_API void cgfa_dataset_free(cgfa_dataset* data);
CGFA_API size_t cgfa_dataset_rows(const cgfa_dataset* data);
CGFA_API size_t cgfa_dataset_cols(const cgfa_dataset* data);
CGFA_API const char* cgfa_dataset_name(const cgfa_dataset* data);
CGFA_API const char* cgfa_dataset_column(const cgfa_dataset* data, size_t j);
/* NULL when the dataset has no label column or i is out of range. */
CGFA_API const char* cgfa_dataset_label(const cgfa_dataset* data, size_t i);
CGFA_API cgfa_status cgfa_dataset_value(const cgfa_dataset* data, size_t i, size_t j, double* out);

CGFA_API size_t cgfa_bundled_count(void);
CGFA_API const char* cgfa_bundled_name(size_t k);
CGFA_API const char* cgfa_bundled_description(size_t k);
CGFA_API const char* cgfa_bundled_path(size_t k);
CGFA_API int cgfa_bundled_available(size_t k);

/* Fitting. G is ignored by single-distribution families, q by CN/Gaussian. */
CGFA_API cgfa_status cgfa_fit(const cgfa_dataset* data, cgfa_family family, int G, int q,
                              const cgfa_fit_options* options, cgfa_model** out);
CGFA_API void cgfa_model_free(cgfa_model* model);
CGFA_API cgfa_family cgfa_model_family(const cgfa_model* model);
CGFA_API int cgfa_model_G(const cgfa_model* model);
CGFA_API int cgfa_model_q(const cgfa_model* model);
CGFA_API size_t cgfa_model_p(const cgfa_model* model);
CGFA_API double cgfa_model_loglik(const cgfa_model* model);
CGFA_API double cgfa_model_bic(const cgfa_model* model);
CGFA_API size_t cgfa_model_n_params(const cgfa_model* model);
CGFA_API int cgfa_model_iterations(const cgfa_model* model);
CGFA_API int cgfa_model_converged(const cgfa_model* model);
CGFA_API double cgfa_model_baseline_loglik(const cgfa_model* model);
CGFA_API cgfa_status cgfa_model_component(const cgfa_model* model, int g, double* pi, double* alpha,
                                          double* eta);
/* Per-point results of the most recent fit or cgfa_model_score call. */
CGFA_API size_t cgfa_model_rows(const cgfa_model* model);
CGFA_API cgfa_status cgfa_model_point(const cgfa_model* model, size_t i, int* label, double* good_prob,
                                      int* bad_flag, double* weight);

CGFA_API cgfa_status cgfa_model_save(const cgfa_model* model, const char* path);
CGFA_API cgfa_status cgfa_model_load(const char* path, cgfa_model** out);
/* Re-scores data under the stored parameters and refreshes the per-point results. */
CGFA_API cgfa_status cgfa_model_score(cgfa_model* model, const cgfa_dataset* data, double* loglik,
                                      double* bic);
CGFA_API cgfa_status cgfa_model_write_flags(const cgfa_model* model, const cgfa_dataset* data,
                                            const char* path);
/* grid = 0 emits the point table only; contours need p = 2. */
CGFA_API cgfa_status cgfa_model_write_plot(const cgfa_model* model, const cgfa_dataset* data, int grid,
                                           const char* path);

CGFA_API cgfa_status cgfa_lr_test(double loglik_null, double loglik_alt, int df, double* statistic,
                                  double* p_value);

/* Grid search over G in [g_lo, g_hi] and q in [q_lo, q_hi]. */
CGFA_API cgfa_status cgfa_select(const cgfa_dataset* data, cgfa_family family, int g_lo, int g_hi, int q_lo,
                                 int q_hi, const cgfa_fit_options* options, cgfa_selection** out);
CGFA_API void cgfa_selection_free(cgfa_selection* sel);
CGFA_API size_t cgfa_selection_count(const cgfa_selection* sel);
CGFA_API cgfa_status cgfa_selection_entry(const cgfa_selection* sel, size_t k, cgfa_score* out);
/* Empty string for fitted candidates. */
CGFA_API const char* cgfa_selection_failure(const cgfa_selection* sel, size_t k);
/* A new model handle holding the best candidate; free it separately. */
CGFA_API cgfa_status cgfa_selection_best(const cgfa_selection* sel, cgfa_model** out);

/* Perturbation study: overwrite (row, column) with each of lo, lo+step, ..., hi
 * and run a grid search per value. */
CGFA_API cgfa_status cgfa_perturbation_study(const cgfa_dataset* data, size_t row, const char* column,
                                             double lo, double hi, double step, cgfa_family family,
                                             int g_lo, int g_hi, int q_lo, int q_hi,
                                             const cgfa_fit_options* options, cgfa_study** out);
CGFA_API void cgfa_study_free(cgfa_study* study);
CGFA_API size_t cgfa_study_count(const cgfa_study* study);
CGFA_API cgfa_status cgfa_study_row_get(const cgfa_study* study, size_t k, cgfa_study_row* out);
CGFA_API const char* cgfa_study_failure(const cgfa_study* study, size_t k);
CGFA_API cgfa_status cgfa_study_write_csv(const cgfa_study* study, const char* path);

#ifdef __cplusplus
}
#endif

#endif
