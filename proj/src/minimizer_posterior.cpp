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

#include "mme/minimizer_posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mme/errors.hpp"

namespace mme {

namespace {

constexpr double kDenominatorFloor = 1e-12;
constexpr double kNegativeVarianceTol = 1e-8;
constexpr int kSampleBlock = 2048;

double step_score(double mu_inc, double mu) {
  if (mu < mu_inc) return 1.0;
  if (mu == mu_inc) return 0.5;
  return 0.0;
}

}  // namespace

std::string to_string(CovarianceMode mode) {
  return mode == CovarianceMode::kIndependent ? "independent" : "with_covariance";
}

CovarianceMode parse_covariance_mode(const std::string& text) {
  if (text == "independent") return CovarianceMode::kIndependent;
  if (text == "with_covariance" || text == "with-covariance") return CovarianceMode::kWithCovariance;
  throw UsageError("unknown covariance mode '" + text + "' (expected independent|with_covariance)");
}

bool MinimizerDistribution::is_valid(double tol) const {
  if (probabilities.empty()) return false;
  double s = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0) || !std::isfinite(p)) return false;
    s += p;
  }
  return std::abs(s - 1.0) <= tol;
}

std::size_t MinimizerDistribution::mode() const {
  return static_cast<std::size_t>(std::max_element(probabilities.begin(), probabilities.end()) -
                                  probabilities.begin());
}

std::size_t argmin_index(std::span<const double> values) {
  if (values.empty()) throw UsageError("argmin over an empty set");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] < values[best]) best = i;
  return best;
}

Incumbent incumbent(const PosteriorSnapshot& post, const Grid& grid) {
  const MarginalPrediction pred = predict_marginal(post, grid.points());
  const std::size_t idx = argmin_index({pred.mean.data(), static_cast<std::size_t>(pred.mean.size())});
  return {idx, grid.point(idx), pred.mean[static_cast<Eigen::Index>(idx)]};
}

std::vector<double> proxy_scores(std::span<const double> mean, std::span<const double> variance,
                                 std::span<const double> cov_with_incumbent, std::size_t inc,
                                 CovarianceMode mode, double variance_scale) {
  const std::size_t n = mean.size();
  if (n == 0 || variance.size() != n || inc >= n)
    throw UsageError("proxy_scores: inconsistent moment vectors");
  const bool with_cov = mode == CovarianceMode::kWithCovariance;
  if (with_cov && cov_with_incumbent.size() != n)
    throw UsageError("proxy_scores: covariance mode needs the incumbent covariance column");

  const double neg_tol = -kNegativeVarianceTol * variance_scale;
  for (std::size_t i = 0; i < n; ++i) {
    if (variance[i] < neg_tol)
      throw NumericalError("negative posterior variance " + std::to_string(variance[i]) +
                           " at grid index " + std::to_string(i));
  }

  const double mu_inc = mean[inc];
  const double v_inc = std::max(variance[inc], 0.0);
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == inc) {
      scores[i] = 0.5;
      continue;
    }
    const double v = std::max(variance[i], 0.0);
    double denom = 0.0;
    if (with_cov) denom = std::sqrt(std::max(v_inc + v - 2.0 * cov_with_incumbent[i], 0.0));
    if (!with_cov || denom < kDenominatorFloor) denom = std::sqrt(v_inc + v);
    scores[i] = denom < kDenominatorFloor ? step_score(mu_inc, mean[i])
                                          : normal_cdf((mu_inc - mean[i]) / denom);
  }
  return scores;
}

MinimizerDistribution normalize_scores(std::span<const double> scores) {
  double total = 0.0;
  for (double s : scores) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw NumericalError("invalid proxy score");
    total += s;
  }
  if (!(total > 0.0)) throw NumericalError("proxy scores sum to zero");
  MinimizerDistribution d;
  d.probabilities.resize(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) d.probabilities[i] = scores[i] / total;
  return d;
}

std::vector<double> proxy_scores(const PosteriorSnapshot& post, const Grid& grid,
                                 const Incumbent& inc, CovarianceMode mode) {
  if (inc.index >= grid.size()) throw UsageError("incumbent index outside the grid");
  const double scale = post.hyperparameters().signal_variance;
  if (mode == CovarianceMode::kIndependent) {
    const MarginalPrediction pred = predict_marginal(post, grid.points());
    return proxy_scores({pred.mean.data(), grid.size()}, {pred.variance.data(), grid.size()}, {},
                        inc.index, mode, scale);
  }
  const JointPrediction joint = predict_joint(post, grid.points());
  const Eigen::VectorXd var = joint.covariance.diagonal();
  const Eigen::VectorXd col = joint.covariance.col(static_cast<Eigen::Index>(inc.index));
  return proxy_scores({joint.mean.data(), grid.size()}, {var.data(), grid.size()},
                      {col.data(), grid.size()}, inc.index, mode, scale);
}

MinimizerDistribution proxy_distribution(const PosteriorSnapshot& post, const Grid& grid,
                                         const Incumbent& inc, CovarianceMode mode) {
  const std::vector<double> s = proxy_scores(post, grid, inc, mode);
  return normalize_scores(s);
}

double entropy(std::span<const double> probabilities) {
  double h = 0.0;
  for (double p : probabilities)
    if (p > 0.0) h -= p * std::log(p);
  return std::max(h, 0.0);
}

double entropy(const MinimizerDistribution& dist) { return entropy(dist.probabilities); }

double kl_divergence(const MinimizerDistribution& p_true, const MinimizerDistribution& q) {
  if (p_true.size() != q.size()) throw UsageError("kl_divergence: distributions over different grids");
  double kl = 0.0;
  for (std::size_t i = 0; i < p_true.size(); ++i) {
    const double p = p_true.probabilities[i];
    if (p <= 0.0) continue;
    if (q.probabilities[i] <= 0.0) return std::numeric_limits<double>::infinity();
    kl += p * std::log(p / q.probabilities[i]);
  }
  return std::max(kl, 0.0);
}

MinimizerDistribution sampled_minimizer_distribution(const JointPrediction& joint, int count, Rng& rng,
                                                     double variance_floor) {
  if (count < 1) throw UsageError("sample count must be >= 1");
  const FunctionSampler sampler(joint, variance_floor);
  std::vector<double> hist(static_cast<std::size_t>(joint.mean.size()), 0.0);
  for (int done = 0; done < count;) {
    const int block = std::min(kSampleBlock, count - done);
    const Eigen::MatrixXd s = sampler.draw(rng, block);
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      Eigen::Index best = 0;
      for (Eigen::Index i = 1; i < s.rows(); ++i)
        if (s(i, j) < s(best, j)) best = i;
      hist[static_cast<std::size_t>(best)] += 1.0;
    }
    done += block;
  }
  for (double& h : hist) h /= static_cast<double>(count);
  return {std::move(hist)};
}

MinimizerDistribution sampled_minimizer_distribution(const PosteriorSnapshot& post, const Grid& grid,
                                                     int count, Rng& rng) {
  return sampled_minimizer_distribution(predict_joint(post, grid.points()), count, rng, sampling_variance_floor(post));
}

double total_variation(const MinimizerDistribution& p, const MinimizerDistribution& q) {
  if (p.size() != q.size()) throw UsageError("total_variation: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p.probabilities[i] - q.probabilities[i]);
  return 0.5 * s;
}

}  // namespace mme
