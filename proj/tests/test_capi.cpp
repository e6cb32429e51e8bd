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

// Exercises the shared library through its C interface only.

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "mme/mme.h"
#include "oracles.hpp"

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  mme_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("version and errors") {
  CHECK(std::string(mme_version()) == "0.1.0");
  double v = 0.0;
  const double x = 0.0;
  CHECK(mme_objective_evaluate("nope", &x, 1, &v) == MME_ERROR_USAGE);
  CHECK(std::string(mme_last_error()).find("nope") != std::string::npos);
  CHECK(mme_objective_evaluate("toy1d", &x, 1, &v) == MME_OK);
  CHECK(v == 0.0);
  CHECK(mme_objective_evaluate("toy1d", &x, 1, nullptr) == MME_ERROR_USAGE);
  const double out = 2.0;
  CHECK(mme_objective_evaluate("toy1d", &out, 1, &v) == MME_ERROR_USAGE);
  mme_string_free(nullptr);
  mme_posterior_destroy(nullptr);
  mme_grid_destroy(nullptr);
  mme_experiment_destroy(nullptr);
}

TEST_CASE("objectives") {
  size_t dim = 0;
  double lo[2], hi[2];
  REQUIRE(mme_objective_info("camel6", &dim, lo, hi) == MME_OK);
  CHECK(dim == 2);
  CHECK(lo[0] == -2.0);
  CHECK(hi[1] == 1.0);
  const double p[2] = {4.0, 2.0};
  double v = 0.0;
  REQUIRE(mme_objective_evaluate("hosaki", p, 2, &v) == MME_OK);
  CHECK(v == doctest::Approx(oracle::hosaki(4.0, 2.0)).epsilon(1e-14));
  CHECK(mme_objective_evaluate("hosaki", p, 1, &v) == MME_ERROR_USAGE);

  double a = 0.0, b = 0.0;
  CHECK(mme_noisy_query("hosaki", p, 2, 0.1, 7, &a) == MME_OK);
  CHECK(mme_noisy_query("hosaki", p, 2, 0.1, 7, &b) == MME_OK);
  CHECK(a == b);
  CHECK(a != v);

  char* json = nullptr;
  REQUIRE(mme_ground_truth_json("toy1d", nullptr, 0, &json) == MME_OK);
  const std::string text = take(json);
  CHECK(text.find("\"grid_minimum\"") != std::string::npos);
  const int shape[2] = {5, 5};
  CHECK(mme_ground_truth_json("toy1d", shape, 2, &json) == MME_ERROR_USAGE);
}

TEST_CASE("posterior through the C interface matches the dense oracle") {
  const std::vector<double> pts = {0.1, 0.2, 0.5, 0.9, 0.3, 0.7};  // three 2D points
  const std::vector<double> y = {0.3, -0.2, 0.8};
  const mme_hyperparameters hp{0.4, 1.3, 0.05, 0.1};
  mme_posterior* post = nullptr;
  REQUIRE(mme_posterior_create(pts.data(), 3, 2, y.data(), &hp, &post) == MME_OK);
  CHECK(mme_posterior_size(post) == 3);

  const std::vector<double> q = {0.0, 0.0, 0.5, 0.5, 1.0, 0.2};
  std::vector<double> mean(3), cov(9);
  REQUIRE(mme_posterior_predict(post, q.data(), 3, mean.data(), cov.data()) == MME_OK);
  std::vector<oracle::Vec> xs, qs;
  for (int i = 0; i < 3; ++i) {
    xs.push_back(oracle::Vec::Map(&pts[2 * i], 2));
    qs.push_back(oracle::Vec::Map(&q[2 * i], 2));
  }
  const oracle::Joint ref = oracle::posterior(xs, y, {0.4, 1.3, 0.05, 0.1}, qs);
  for (int i = 0; i < 3; ++i) {
    CHECK(mean[i] == doctest::Approx(ref.mean[i]).epsilon(1e-8));
    for (int j = 0; j < 3; ++j) CHECK(std::abs(cov[3 * i + j] - ref.cov(i, j)) < 1e-8);
  }
  CHECK(mme_posterior_predict(post, q.data(), 3, mean.data(), nullptr) == MME_OK);

  double k = 0.0;
  REQUIRE(mme_kernel_eval(&pts[0], &pts[2], 2, &hp, &k) == MME_OK);
  CHECK(k == doctest::Approx(oracle::se_kernel(xs[0], xs[1], {0.4, 1.3, 0.05, 0.1})).epsilon(1e-14));

  double le = 0.0, grad[4];
  REQUIRE(mme_log_evidence(pts.data(), 3, 2, y.data(), &hp, &le, grad) == MME_OK);
  CHECK(le == doctest::Approx(oracle::log_evidence(xs, y, {0.4, 1.3, 0.05, 0.1}, 1.3e-10)).epsilon(1e-9));
  const double h = 1e-6;
  mme_hyperparameters up = hp, down = hp;
  up.mean_const += h;
  down.mean_const -= h;
  double lu = 0.0, ld = 0.0;
  mme_log_evidence(pts.data(), 3, 2, y.data(), &up, &lu, nullptr);
  mme_log_evidence(pts.data(), 3, 2, y.data(), &down, &ld, nullptr);
  CHECK(grad[3] == doctest::Approx((lu - ld) / (2 * h)).epsilon(1e-5));

  mme_hyperparameters bad = hp;
  bad.lengthscale = -1.0;
  mme_posterior* none = nullptr;
  CHECK(mme_posterior_create(pts.data(), 3, 2, y.data(), &bad, &none) == MME_ERROR_USAGE);
  CHECK(none == nullptr);
  mme_posterior_destroy(post);
}

TEST_CASE("grids, distributions and scoring") {
  const double lo = 0.0, hi = 1.0;
  const int n = 11;
  mme_grid* grid = nullptr;
  REQUIRE(mme_grid_create(&lo, &hi, &n, 1, &grid) == MME_OK);
  CHECK(mme_grid_size(grid) == 11);
  CHECK(mme_grid_dimension(grid) == 1);
  double x = 0.0;
  REQUIRE(mme_grid_point(grid, 3, &x) == MME_OK);
  CHECK(x == doctest::Approx(0.3));
  CHECK(mme_grid_point(grid, 11, &x) == MME_ERROR_USAGE);
  const int zero = 0;
  mme_grid* bad = nullptr;
  CHECK(mme_grid_create(&lo, &hi, &zero, 1, &bad) == MME_ERROR_USAGE);

  const std::vector<double> pts = {0.2, 0.6, 0.9};
  const std::vector<double> y = {0.1, -0.5, 0.3};
  const mme_hyperparameters hp{0.2, 1.0, 0.01, 0.0};
  mme_posterior* post = nullptr;
  REQUIRE(mme_posterior_create(pts.data(), 3, 1, y.data(), &hp, &post) == MME_OK);

  size_t inc = 0;
  double inc_value = 0.0;
  REQUIRE(mme_incumbent(post, grid, &inc, &inc_value) == MME_OK);
  std::vector<double> proxy(11), sampled(11);
  REQUIRE(mme_proxy_distribution(post, grid, MME_COV_INDEPENDENT, proxy.data()) == MME_OK);
  double total = 0.0;
  for (double p : proxy) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  for (size_t i = 0; i < 11; ++i) CHECK(proxy[i] <= proxy[inc] + 1e-15);

  REQUIRE(mme_sampled_minimizer_distribution(post, grid, 5000, 3, sampled.data()) == MME_OK);
  double h = 0.0, kl = 0.0;
  REQUIRE(mme_entropy(proxy.data(), 11, &h) == MME_OK);
  CHECK(h == doctest::Approx(oracle::entropy(proxy)).epsilon(1e-12));
  REQUIRE(mme_kl_divergence(proxy.data(), proxy.data(), 11, &kl) == MME_OK);
  CHECK(std::abs(kl) < 1e-12);
  const std::vector<double> point_mass = {1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
  const std::vector<double> other_mass = {0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0};
  REQUIRE(mme_kl_divergence(point_mass.data(), other_mass.data(), 11, &kl) == MME_OK);
  CHECK(std::isinf(kl));

  std::vector<double> samples(4 * 11);
  REQUIRE(mme_sample_functions(post, grid, 4, 9, samples.data()) == MME_OK);
  CHECK(std::isfinite(samples[43]));

  mme_acquisition_config cfg;
  mme_acquisition_config_default(&cfg);
  CHECK(cfg.criterion == MME_CRITERION_MME);
  CHECK(cfg.mc_samples == 30);
  std::vector<double> scores(11);
  size_t chosen = 99;
  REQUIRE(mme_score_grid(post, grid, &cfg, 1, 1, scores.data(), &chosen) == MME_OK);
  size_t again = 0;
  REQUIRE(mme_select_next(scores.data(), 11, 0, &again) == MME_OK);
  CHECK(chosen == again);
  cfg.mc_samples = 0;
  CHECK(mme_score_grid(post, grid, &cfg, 1, 1, scores.data(), &chosen) == MME_ERROR_USAGE);
  cfg.mc_samples = 30;
  cfg.criterion = static_cast<mme_criterion>(17);
  CHECK(mme_score_grid(post, grid, &cfg, 1, 1, scores.data(), &chosen) == MME_ERROR_USAGE);

  scores[4] = std::numeric_limits<double>::quiet_NaN();
  CHECK(mme_select_next(scores.data(), 11, 1, &again) == MME_ERROR_USAGE);

  mme_posterior_destroy(post);
  mme_grid_destroy(grid);
}

TEST_CASE("fitting") {
  std::vector<double> pts, y;
  for (int i = 0; i < 12; ++i) {
    const double x = -1.5 + 3.0 * i / 11.0;
    pts.push_back(x);
    y.push_back(oracle::toy1d(x));
  }
  const double lo = -1.5, hi = 1.5;
  mme_hyperparameters a{}, b{};
  REQUIRE(mme_fit_hyperparameters(pts.data(), 12, 1, y.data(), &lo, &hi, 3, 5, &a) == MME_OK);
  REQUIRE(mme_fit_hyperparameters(pts.data(), 12, 1, y.data(), &lo, &hi, 3, 5, &b) == MME_OK);
  CHECK(std::memcmp(&a, &b, sizeof a) == 0);
  CHECK(a.lengthscale > 0.0);
  CHECK(mme_fit_hyperparameters(pts.data(), 1, 1, y.data(), &lo, &hi, 3, 5, &a) == MME_ERROR_USAGE);
}

TEST_CASE("experiment handle") {
  mme_experiment* exp = nullptr;
  REQUIRE(mme_experiment_create(&exp) == MME_OK);
  REQUIRE(mme_experiment_load_json(exp, R"({"objective": "toy1d", "reps": 2, "n_iter": 4})") == MME_OK);
  REQUIRE(mme_experiment_set(exp, "mc-samples", "5") == MME_OK);
  CHECK(mme_experiment_set(exp, "bogus", "1") == MME_ERROR_USAGE);
  CHECK(mme_experiment_set(exp, "reps", "x") == MME_ERROR_USAGE);
  CHECK(mme_experiment_load_json(exp, "{") == MME_ERROR_USAGE);

  char* json = nullptr;
  REQUIRE(mme_experiment_config_json(exp, &json) == MME_OK);
  const std::string cfg = take(json);
  CHECK(cfg.find("\"mc_samples\": 5") != std::string::npos);

  size_t len = 0;
  CHECK(mme_experiment_medians(exp, 0, nullptr, nullptr, nullptr, &len) == MME_ERROR_USAGE);
  CHECK(mme_experiment_summary_json(exp, &json) == MME_ERROR_USAGE);

  const auto dir = std::filesystem::temp_directory_path() / "mme_test_capi_out";
  std::filesystem::remove_all(dir);
  REQUIRE(mme_experiment_run(exp, dir.string().c_str()) == MME_OK);
  CHECK(std::filesystem::exists(dir / "batch.csv"));
  CHECK(std::filesystem::exists(dir / "run_001.jsonl"));

  REQUIRE(mme_experiment_medians(exp, 0, nullptr, nullptr, nullptr, &len) == MME_OK);
  CHECK(len == 4);
  std::vector<double> h(4), kl(4), f(4);
  REQUIRE(mme_experiment_medians(exp, 4, h.data(), kl.data(), f.data(), &len) == MME_OK);
  for (double v : h) CHECK(v >= 0.0);
  std::vector<double> head(3, -1.0);
  REQUIRE(mme_experiment_medians(exp, 2, head.data(), nullptr, nullptr, &len) == MME_OK);
  CHECK(len == 4);
  CHECK(head[1] == h[1]);
  CHECK(head[2] == -1.0);

  REQUIRE(mme_experiment_summary_json(exp, &json) == MME_OK);
  CHECK(take(json).find("\"completed\": 2") != std::string::npos);

  // A file in place of the output directory is an I/O failure.
  const auto file = std::filesystem::temp_directory_path() / "mme_test_capi_file";
  { std::FILE* fp = std::fopen(file.string().c_str(), "w"); std::fclose(fp); }
  CHECK(mme_experiment_run(exp, (file / "sub").string().c_str()) == MME_ERROR_IO);

  std::filesystem::remove_all(dir);
  std::filesystem::remove(file);
  mme_experiment_destroy(exp);
}

TEST_CASE("selfcheck") {
  char* report = nullptr;
  int ok = 0;
  REQUIRE(mme_selfcheck(20260101, &report, &ok) == MME_OK);
  const std::string text = take(report);
  CHECK(ok == 1);
  CHECK(text.find("posterior_inverse") != std::string::npos);
}
