// Copyright 2026 The MME Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include "mme/mme.h"

#include <cstdlib>
#include <cstring>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mme/acquisition.hpp"
#include "mme/errors.hpp"
#include "mme/experiment.hpp"
#include "mme/gp.hpp"
#include "mme/grid.hpp"
#include "mme/minimizer_posterior.hpp"
#include "mme/selfcheck.hpp"
#include "mme/testbed.hpp"

struct mme_posterior {
  mme::PosteriorSnapshot snapshot;
};

struct mme_grid {
  mme::Grid grid;
};

struct mme_experiment {
  mme::ExperimentConfig config;
  std::optional<mme::BatchSummary> summary;
};

namespace {

using json = nlohmann::ordered_json;

thread_local std::string g_last_error;

mme_status fail(mme_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Maps exceptions from the core onto status codes.
template <typename F>
mme_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return MME_OK;
  } catch (const mme::UsageError& e) {
    return fail(MME_ERROR_USAGE, e.what());
  } catch (const mme::NumericalError& e) {
    return fail(MME_ERROR_NUMERICAL, e.what());
  } catch (const mme::IoError& e) {
    return fail(MME_ERROR_IO, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(MME_ERROR_USAGE, e.what());
  } catch (const std::exception& e) {
    return fail(MME_ERROR_INTERNAL, e.what());
  } catch (...) {
    return fail(MME_ERROR_INTERNAL, "unknown error");
  }
}

void require(bool cond, const char* message) {
  if (!cond) throw mme::UsageError(message);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::vector<mme::Point> to_points(const double* data, std::size_t n, std::size_t dim) {
  require(n == 0 || data != nullptr, "point array is NULL");
  require(dim > 0, "dimension must be positive");
  std::vector<mme::Point> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = Eigen::Map<const Eigen::VectorXd>(data + i * dim, static_cast<Eigen::Index>(dim));
  return pts;
}

mme::Dataset to_dataset(const double* points, std::size_t n, std::size_t dim, const double* y) {
  require(n == 0 || y != nullptr, "observation array is NULL");
  mme::Dataset d;
  d.points = to_points(points, n, dim);
  d.observations.assign(y, y + n);
  d.validate();
  return d;
}

mme::Hyperparameters to_hp(const mme_hyperparameters* hp) {
  require(hp != nullptr, "hyperparameters are NULL");
  mme::Hyperparameters out{hp->lengthscale, hp->signal_variance, hp->noise_variance, hp->mean_const};
  out.validate();
  return out;
}

mme::CovarianceMode to_mode(mme_cov_mode mode) {
  switch (mode) {
    case MME_COV_INDEPENDENT: return mme::CovarianceMode::kIndependent;
    case MME_COV_WITH_COVARIANCE: return mme::CovarianceMode::kWithCovariance;
  }
  throw mme::UsageError("unknown covariance mode");
}

mme::Criterion to_criterion(mme_criterion c) {
  switch (c) {
    case MME_CRITERION_MME: return mme::Criterion::kMme;
    case MME_CRITERION_FAST_MME: return mme::Criterion::kFastMme;
    case MME_CRITERION_MEI: return mme::Criterion::kMei;
    case MME_CRITERION_PI: return mme::Criterion::kPi;
    case MME_CRITERION_VARIANCE: return mme::Criterion::kVariance;
  }
  throw mme::UsageError("unknown criterion");
}

void check_dim(const mme_posterior* post, const mme_grid* grid) {
  require(post != nullptr && grid != nullptr, "NULL handle");
  const int d = post->snapshot.dataset().dimension();
  require(d < 0 || static_cast<std::size_t>(d) == grid->grid.dimension(),
          "posterior and grid dimensions differ");
}

json point_json(const mme::Point& p) {
  json a = json::array();
  for (Eigen::Index k = 0; k < p.size(); ++k) a.push_back(p[k]);
  return a;
}

}  // namespace

extern "C" {

const char* mme_version(void) { return "0.1.0"; }

const char* mme_last_error(void) { return g_last_error.c_str(); }

void mme_string_free(char* s) { std::free(s); }

mme_status mme_objective_info(const char* name, size_t* dimension, double* lower, double* upper) {
  return guarded([&] {
    require(name != nullptr && dimension != nullptr, "NULL argument");
    const mme::Objective& obj = mme::objective_by_name(name);
    *dimension = static_cast<size_t>(obj.dimension);
    for (int k = 0; k < obj.dimension; ++k) {
      if (lower != nullptr) lower[k] = obj.domain.lower[k];
      if (upper != nullptr) upper[k] = obj.domain.upper[k];
    }
  });
}

mme_status mme_objective_evaluate(const char* name, const double* x, size_t dim, double* value) {
  return guarded([&] {
    require(name != nullptr && x != nullptr && value != nullptr, "NULL argument");
    const mme::Objective& obj = mme::objective_by_name(name);
    require(dim == static_cast<size_t>(obj.dimension), "dimension does not match the objective");
    *value = mme::evaluate_objective(obj, to_points(x, 1, dim)[0]);
  });
}

mme_status mme_noisy_query(const char* name, const double* x, size_t dim, double noise_std, uint64_t seed,
                           double* value) {
  return guarded([&] {
    require(name != nullptr && x != nullptr && value != nullptr, "NULL argument");
    const mme::Objective& obj = mme::objective_by_name(name);
    require(dim == static_cast<size_t>(obj.dimension), "dimension does not match the objective");
    mme::Rng rng(seed);
    *value = mme::noisy_query(mme::NoisyOracle{&obj, noise_std}, to_points(x, 1, dim)[0], rng);
  });
}

mme_status mme_ground_truth_json(const char* name, const int* shape, size_t ndim, char** json_out) {
  return guarded([&] {
    require(name != nullptr && json_out != nullptr, "NULL argument");
    const mme::Objective& obj = mme::objective_by_name(name);
    std::vector<int> s = shape == nullptr ? mme::default_grid_shape(obj) : std::vector<int>(shape, shape + ndim);
    const mme::Grid grid(obj.domain, s);
    const mme::GroundTruth truth = mme::ground_truth(obj, grid);
    json j;
    j["objective"] = obj.name;
    j["grid"] = mme::format_grid_shape(s);
    j["global_minimum"] = truth.global_minimum;
    j["global_minimizers"] = json::array();
    for (const mme::Point& p : truth.global_minimizers) j["global_minimizers"].push_back(point_json(p));
    j["local_minima"] = json::array();
    for (std::size_t i = 0; i < truth.local_minimizers.size(); ++i)
      j["local_minima"].push_back(json{{"point", point_json(truth.local_minimizers[i])}, {"value", truth.local_minima[i]}});
    j["grid_minimum"] = truth.grid_minimum;
    j["grid_minimizers"] = json::array();
    for (std::size_t i : truth.grid_minimizers)
      j["grid_minimizers"].push_back(json{{"index", i}, {"point", point_json(grid.point(i))}});
    *json_out = dup_string(j.dump(2));
  });
}

mme_status mme_kernel_eval(const double* a, const double* b, size_t dim, const mme_hyperparameters* hp,
                           double* value) {
  return guarded([&] {
    require(a != nullptr && b != nullptr && value != nullptr, "NULL argument");
    *value = mme::kernel_eval(to_points(a, 1, dim)[0], to_points(b, 1, dim)[0], to_hp(hp));
  });
}

mme_status mme_posterior_create(const double* points, size_t n, size_t dim, const double* y,
                                const mme_hyperparameters* hp, mme_posterior** out) {
  return guarded([&] {
    require(out != nullptr, "NULL output handle");
    *out = nullptr;
    auto post = std::make_unique<mme_posterior>(mme_posterior{mme::build_posterior(to_dataset(points, n, dim, y), to_hp(hp))});
    *out = post.release();
  });
}

void mme_posterior_destroy(mme_posterior* post) { delete post; }

size_t mme_posterior_size(const mme_posterior* post) { return post == nullptr ? 0 : post->snapshot.size(); }

mme_status mme_posterior_predict(const mme_posterior* post, const double* query, size_t m, double* mean,
                                 double* cov) {
  return guarded([&] {
    require(post != nullptr && mean != nullptr, "NULL argument");
    const int d = post->snapshot.dataset().dimension();
    require(d > 0, "predicting from an empty posterior needs the dataset dimension; add an observation");
    const std::vector<mme::Point> q = to_points(query, m, static_cast<std::size_t>(d));
    const mme::JointPrediction jp = mme::predict_joint(post->snapshot, q);
    for (size_t i = 0; i < m; ++i) {
      mean[i] = jp.mean[static_cast<Eigen::Index>(i)];
      if (cov != nullptr)
        for (size_t j = 0; j < m; ++j) cov[i * m + j] = jp.covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  });
}

mme_status mme_log_evidence(const double* points, size_t n, size_t dim, const double* y,
                            const mme_hyperparameters* hp, double* value, double* gradient) {
  return guarded([&] {
    require(value != nullptr, "NULL argument");
    const mme::Evidence ev = mme::log_evidence(to_dataset(points, n, dim, y), to_hp(hp));
    *value = ev.value;
    if (gradient != nullptr)
      for (std::size_t k = 0; k < 4; ++k) gradient[k] = ev.gradient[k];
  });
}

mme_status mme_fit_hyperparameters(const double* points, size_t n, size_t dim, const double* y, const double* lower,
                                   const double* upper, int restarts, uint64_t seed, mme_hyperparameters* out) {
  return guarded([&] {
    require(lower != nullptr && upper != nullptr && out != nullptr, "NULL argument");
    const mme::Dataset data = to_dataset(points, n, dim, y);
    mme::Box box{std::vector<double>(lower, lower + dim), std::vector<double>(upper, upper + dim)};
    mme::Rng rng(seed);
    const mme::Hyperparameters hp = mme::fit_hyperparameters(data, restarts, mme::default_bounds(data, box), rng);
    *out = mme_hyperparameters{hp.lengthscale, hp.signal_variance, hp.noise_variance, hp.mean_const};
  });
}

mme_status mme_sample_functions(const mme_posterior* post, const mme_grid* grid, int count, uint64_t seed,
                                double* samples) {
  return guarded([&] {
    check_dim(post, grid);
    require(samples != nullptr && count > 0, "bad sample request");
    mme::Rng rng(seed);
    const Eigen::MatrixXd s = mme::sample_functions(post->snapshot, grid->grid.points(), count, rng);
    const std::size_t g = grid->grid.size();
    for (int j = 0; j < count; ++j)
      for (std::size_t i = 0; i < g; ++i) samples[static_cast<std::size_t>(j) * g + i] = s(static_cast<Eigen::Index>(i), j);
  });
}

mme_status mme_grid_create(const double* lower, const double* upper, const int* shape, size_t ndim, mme_grid** out) {
  return guarded([&] {
    require(lower != nullptr && upper != nullptr && shape != nullptr && out != nullptr, "NULL argument");
    *out = nullptr;
    mme::Box box{std::vector<double>(lower, lower + ndim), std::vector<double>(upper, upper + ndim)};
    auto g = std::make_unique<mme_grid>(mme_grid{mme::Grid(box, std::vector<int>(shape, shape + ndim))});
    *out = g.release();
  });
}

void mme_grid_destroy(mme_grid* grid) { delete grid; }

size_t mme_grid_size(const mme_grid* grid) { return grid == nullptr ? 0 : grid->grid.size(); }

size_t mme_grid_dimension(const mme_grid* grid) { return grid == nullptr ? 0 : grid->grid.dimension(); }

mme_status mme_grid_point(const mme_grid* grid, size_t index, double* out) {
  return guarded([&] {
    require(grid != nullptr && out != nullptr, "NULL argument");
    require(index < grid->grid.size(), "grid index out of range");
    const mme::Point& p = grid->grid.point(index);
    for (Eigen::Index k = 0; k < p.size(); ++k) out[k] = p[k];
  });
}

mme_status mme_incumbent(const mme_posterior* post, const mme_grid* grid, size_t* index, double* value) {
  return guarded([&] {
    check_dim(post, grid);
    const mme::Incumbent inc = mme::incumbent(post->snapshot, grid->grid);
    if (index != nullptr) *index = inc.index;
    if (value != nullptr) *value = inc.value;
  });
}

mme_status mme_proxy_distribution(const mme_posterior* post, const mme_grid* grid, mme_cov_mode mode,
                                  double* probabilities) {
  return guarded([&] {
    check_dim(post, grid);
    require(probabilities != nullptr, "NULL argument");
    const mme::Incumbent inc = mme::incumbent(post->snapshot, grid->grid);
    const mme::MinimizerDistribution d = mme::proxy_distribution(post->snapshot, grid->grid, inc, to_mode(mode));
    std::copy(d.probabilities.begin(), d.probabilities.end(), probabilities);
  });
}

mme_status mme_sampled_minimizer_distribution(const mme_posterior* post, const mme_grid* grid, int count,
                                              uint64_t seed, double* probabilities) {
  return guarded([&] {
    check_dim(post, grid);
    require(probabilities != nullptr, "NULL argument");
    mme::Rng rng(seed);
    const mme::MinimizerDistribution d = mme::sampled_minimizer_distribution(post->snapshot, grid->grid, count, rng);
    std::copy(d.probabilities.begin(), d.probabilities.end(), probabilities);
  });
}

mme_status mme_entropy(const double* probabilities, size_t n, double* nats) {
  return guarded([&] {
    require(probabilities != nullptr && nats != nullptr, "NULL argument");
    *nats = mme::entropy(std::span<const double>(probabilities, n));
  });
}

mme_status mme_kl_divergence(const double* p, const double* q, size_t n, double* nats) {
  return guarded([&] {
    require(p != nullptr && q != nullptr && nats != nullptr, "NULL argument");
    mme::MinimizerDistribution a{std::vector<double>(p, p + n)};
    mme::MinimizerDistribution b{std::vector<double>(q, q + n)};
    *nats = mme::kl_divergence(a, b);
  });
}

void mme_acquisition_config_default(mme_acquisition_config* cfg) {
  if (cfg == nullptr) return;
  cfg->criterion = MME_CRITERION_MME;
  cfg->mc_samples = 30;
  cfg->epsilon = 0.0;
  cfg->cov_mode = MME_COV_INDEPENDENT;
}

mme_status mme_score_grid(const mme_posterior* post, const mme_grid* grid, const mme_acquisition_config* cfg,
                          uint64_t seed, uint64_t iteration, double* scores, size_t* selected) {
  return guarded([&] {
    check_dim(post, grid);
    require(cfg != nullptr && scores != nullptr, "NULL argument");
    mme::AcquisitionConfig ac{to_criterion(cfg->criterion), cfg->mc_samples, cfg->epsilon, to_mode(cfg->cov_mode)};
    ac.validate();
    const mme::GridPosterior gp(post->snapshot, grid->grid);
    const std::vector<double> s = mme::score_grid(gp, ac, seed, iteration);
    std::copy(s.begin(), s.end(), scores);
    if (selected != nullptr) *selected = mme::select_next(s, mme::direction_for(ac.criterion));
  });
}

mme_status mme_select_next(const double* scores, size_t n, int maximize, size_t* index) {
  return guarded([&] {
    require(scores != nullptr && index != nullptr, "NULL argument");
    *index = mme::select_next(std::span<const double>(scores, n),
                              maximize ? mme::Direction::kMaximize : mme::Direction::kMinimize);
  });
}

mme_status mme_experiment_create(mme_experiment** out) {
  return guarded([&] {
    require(out != nullptr, "NULL output handle");
    *out = new mme_experiment();
  });
}

void mme_experiment_destroy(mme_experiment* exp) { delete exp; }

mme_status mme_experiment_load_json(mme_experiment* exp, const char* json_text) {
  return guarded([&] {
    require(exp != nullptr && json_text != nullptr, "NULL argument");
    exp->config = mme::config_from_json(json_text, exp->config);
  });
}

mme_status mme_experiment_set(mme_experiment* exp, const char* key, const char* value) {
  return guarded([&] {
    require(exp != nullptr && key != nullptr && value != nullptr, "NULL argument");
    mme::set_config_value(exp->config, key, value);
  });
}

mme_status mme_experiment_config_json(const mme_experiment* exp, char** json_out) {
  return guarded([&] {
    require(exp != nullptr && json_out != nullptr, "NULL argument");
    *json_out = dup_string(mme::config_to_json(exp->config));
  });
}

mme_status mme_experiment_run(mme_experiment* exp, const char* out_dir) {
  return guarded([&] {
    require(exp != nullptr, "NULL handle");
    exp->summary.reset();
    std::string dir = out_dir != nullptr && *out_dir != '\0' ? std::string(out_dir) : exp->config.output_dir;
    mme::BatchSummary s = mme::run_batch(exp->config);
    if (!dir.empty()) mme::write_outputs(s, dir);
    exp->summary = std::move(s);
  });
}

mme_status mme_experiment_summary_json(const mme_experiment* exp, char** json_out) {
  return guarded([&] {
    require(exp != nullptr && json_out != nullptr, "NULL argument");
    require(exp->summary.has_value(), "experiment has not been run");
    *json_out = dup_string(mme::summary_to_json(*exp->summary));
  });
}

mme_status mme_experiment_medians(const mme_experiment* exp, size_t capacity, double* entropy, double* kl,
                                  double* fmin, size_t* length) {
  return guarded([&] {
    require(exp != nullptr, "NULL handle");
    require(exp->summary.has_value(), "experiment has not been run");
    const mme::BatchSummary& s = *exp->summary;
    const size_t n = s.median_entropy.size();
    if (length != nullptr) *length = n;
    const size_t m = std::min(n, capacity);
    for (size_t k = 0; k < m; ++k) {
      if (entropy != nullptr) entropy[k] = s.median_entropy[k];
      if (kl != nullptr) kl[k] = s.median_kl[k];
      if (fmin != nullptr) fmin[k] = s.median_fmin[k];
    }
  });
}

mme_status mme_selfcheck(uint64_t seed, char** report_json, int* all_passed) {
  return guarded([&] {
    const std::vector<mme::SelfcheckResult> results = mme::run_selfcheck(seed);
    bool ok = true;
    json arr = json::array();
    for (const mme::SelfcheckResult& r : results) {
      ok = ok && r.passed;
      arr.push_back(json{{"name", r.name},
                         {"passed", r.passed},
                         {"worst", r.worst},
                         {"tolerance", r.tolerance},
                         {"detail", r.detail}});
    }
    if (all_passed != nullptr) *all_passed = ok ? 1 : 0;
    if (report_json != nullptr) *report_json = dup_string(json{{"seed", seed}, {"checks", arr}}.dump(2));
  });
}

}  // extern "C"
