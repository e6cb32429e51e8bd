/*
 * Copyright 2026 The MME Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 * =============================================================================
 */

/*
 * C interface to the minimizer-entropy optimization library.
 *
 * Conventions:
 *  - Every fallible function returns an mme_status. On failure the message is
 *    available from mme_last_error() until the next call on the same thread.
 *  - Objects are opaque handles created by *_create and released by *_destroy.
 *    Destroy functions accept NULL.
 *  - Points are passed row-major: point i occupies [i * dim, (i + 1) * dim).
 *  - Strings returned through char** are heap allocated and must be released
 *    with mme_string_free.
 *  - Handles are immutable after creation except mme_experiment, which must
 *    not be used from two threads at once.
 */

#ifndef MME_MME_H_
#define MME_MME_H_

#include <stddef.h>
#include <stdint.h>

#if defined(MME_BUILDING_LIBRARY)
#define MME_API __attribute__((visibility("default")))
#else
#define MME_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mme_status {
  MME_OK = 0,
  MME_ERROR_USAGE = 1,     /* precondition violated (bad argument, dimension, name) */
  MME_ERROR_NUMERICAL = 2, /* factorization or fitting failure */
  MME_ERROR_IO = 3,        /* file system failure */
  MME_ERROR_INTERNAL = 4
} mme_status;

typedef enum mme_cov_mode { MME_COV_INDEPENDENT = 0, MME_COV_WITH_COVARIANCE = 1 } mme_cov_mode;

typedef enum mme_criterion {
  MME_CRITERION_MME = 0,
  MME_CRITERION_FAST_MME = 1,
  MME_CRITERION_MEI = 2,
  MME_CRITERION_PI = 3,
  MME_CRITERION_VARIANCE = 4
} mme_criterion;

typedef struct mme_hyperparameters {
  double lengthscale;
  double signal_variance;
  double noise_variance;
  double mean_const;
} mme_hyperparameters;

typedef struct mme_acquisition_config {
  mme_criterion criterion;
  int mc_samples;
  double epsilon;
  mme_cov_mode cov_mode;
} mme_acquisition_config;

typedef struct mme_posterior mme_posterior;
typedef struct mme_grid mme_grid;
typedef struct mme_experiment mme_experiment;

MME_API const char* mme_version(void);
MME_API const char* mme_last_error(void);
MME_API void mme_string_free(char* s);

/* ---- objectives ------------------------------------------------------- */

/* |lower| and |upper| receive |*dimension| values; pass arrays of length >= 2. */
MME_API mme_status mme_objective_info(const char* name, size_t* dimension, double* lower, double* upper);
MME_API mme_status mme_objective_evaluate(const char* name, const double* x, size_t dim, double* value);
MME_API mme_status mme_noisy_query(const char* name, const double* x, size_t dim, double noise_std,
                                   uint64_t seed, double* value);
/* Ground truth (continuous and grid minimizers) as a JSON document. A NULL
 * |shape| selects the default grid. */
MME_API mme_status mme_ground_truth_json(const char* name, const int* shape, size_t ndim, char** json_out);

/* ---- Gaussian process ------------------------------------------------- */

MME_API mme_status mme_kernel_eval(const double* a, const double* b, size_t dim,
                                   const mme_hyperparameters* hp, double* value);
MME_API mme_status mme_posterior_create(const double* points, size_t n, size_t dim, const double* y,
                                        const mme_hyperparameters* hp, mme_posterior** out);
MME_API void mme_posterior_destroy(mme_posterior* post);
MME_API size_t mme_posterior_size(const mme_posterior* post);
/* |mean| receives m values; |cov| (m * m, row-major) may be NULL. */
MME_API mme_status mme_posterior_predict(const mme_posterior* post, const double* query, size_t m,
                                         double* mean, double* cov);
/* |gradient| receives d/d(log lengthscale, log signal_variance,
 * log noise_variance, mean_const). */
MME_API mme_status mme_log_evidence(const double* points, size_t n, size_t dim, const double* y,
                                    const mme_hyperparameters* hp, double* value, double* gradient);
/* Fits with data-scaled default bounds over the box [lower, upper]. */
MME_API mme_status mme_fit_hyperparameters(const double* points, size_t n, size_t dim, const double* y,
                                           const double* lower, const double* upper, int restarts,
                                           uint64_t seed, mme_hyperparameters* out);
/* |samples| receives count * grid size values, sample-major. */
MME_API mme_status mme_sample_functions(const mme_posterior* post, const mme_grid* grid, int count,
                                        uint64_t seed, double* samples);

/* ---- grids and minimizer distributions --------------------------------- */

MME_API mme_status mme_grid_create(const double* lower, const double* upper, const int* shape, size_t ndim,
                                   mme_grid** out);
MME_API void mme_grid_destroy(mme_grid* grid);
MME_API size_t mme_grid_size(const mme_grid* grid);
MME_API size_t mme_grid_dimension(const mme_grid* grid);
MME_API mme_status mme_grid_point(const mme_grid* grid, size_t index, double* out);

MME_API mme_status mme_incumbent(const mme_posterior* post, const mme_grid* grid, size_t* index, double* value);
/* |probabilities| receives grid-size values. */
MME_API mme_status mme_proxy_distribution(const mme_posterior* post, const mme_grid* grid, mme_cov_mode mode,
                                          double* probabilities);
MME_API mme_status mme_sampled_minimizer_distribution(const mme_posterior* post, const mme_grid* grid, int count,
                                                      uint64_t seed, double* probabilities);
MME_API mme_status mme_entropy(const double* probabilities, size_t n, double* nats);
/* +infinity when q vanishes on the support of p. */
MME_API mme_status mme_kl_divergence(const double* p, const double* q, size_t n, double* nats);

/* ---- acquisition -------------------------------------------------------- */

MME_API void mme_acquisition_config_default(mme_acquisition_config* cfg);
/* Scores all grid candidates; |selected| (may be NULL) receives the chosen index. */
MME_API mme_status mme_score_grid(const mme_posterior* post, const mme_grid* grid,
                                  const mme_acquisition_config* cfg, uint64_t seed, uint64_t iteration,
                                  double* scores, size_t* selected);
MME_API mme_status mme_select_next(const double* scores, size_t n, int maximize, size_t* index);

/* ---- experiments ------------------------------------------------------- */

MME_API mme_status mme_experiment_create(mme_experiment** out);
MME_API void mme_experiment_destroy(mme_experiment* exp);
/* Merges a JSON object of configuration keys into the experiment. */
MME_API mme_status mme_experiment_load_json(mme_experiment* exp, const char* json_text);
MME_API mme_status mme_experiment_set(mme_experiment* exp, const char* key, const char* value);
MME_API mme_status mme_experiment_config_json(const mme_experiment* exp, char** json_out);
/* Runs all repetitions and, when |out_dir| is non-NULL and non-empty (or the
 * configuration names one), writes the output files. */
MME_API mme_status mme_experiment_run(mme_experiment* exp, const char* out_dir);
MME_API mme_status mme_experiment_summary_json(const mme_experiment* exp, char** json_out);
/* Per-iteration medians of the last run. At most |capacity| values are written
 * to each array; |*length| receives the full iteration count. Any output
 * pointer may be NULL. */
MME_API mme_status mme_experiment_medians(const mme_experiment* exp, size_t capacity, double* entropy,
                                          double* kl, double* fmin, size_t* length);

/* Runs the posterior-inverse, evidence-gradient and proxy-bound property
 * suites. |*all_passed| is set to 1 when every suite passes. */
MME_API mme_status mme_selfcheck(uint64_t seed, char** report_json, int* all_passed);

#ifdef __cplusplus
}
#endif

#endif /* MME_MME_H_ */
