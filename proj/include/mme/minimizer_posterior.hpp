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

// Distribution of the minimizer location over a finite grid.
//
// The exact law p(x* = x | D) is approximated pointwise from above by
//
//   g(x) = P(f(x) <= f(x_inc) | D)
//        = Phi((mu(x_inc) - mu(x)) / sqrt(v(x_inc) + v(x) - 2 c(x, x_inc)))
//
// where x_inc is the grid argmin of the posterior mean. Normalizing g over the
// grid gives the proxy distribution. With several competing minimizers the
// covariance term c is ambiguous, so CovarianceMode::kIndependent drops it.

#ifndef MME_MINIMIZER_POSTERIOR_HPP_
#define MME_MINIMIZER_POSTERIOR_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mme/common.hpp"
#include "mme/gp.hpp"
#include "mme/grid.hpp"

namespace mme {

enum class CovarianceMode { kIndependent, kWithCovariance };

std::string to_string(CovarianceMode mode);
CovarianceMode parse_covariance_mode(const std::string& text);

// Probability vector over the points of a grid (same ordering).
struct MinimizerDistribution {
  std::vector<double> probabilities;

  std::size_t size() const { return probabilities.size(); }
  // Non-negative entries summing to 1 within |tol|.
  bool is_valid(double tol = 1e-12) const;
  // Index of the largest mass, smallest index on ties.
  std::size_t mode() const;
};

struct Incumbent {
  std::size_t index = 0;
  Point point;
  double value = 0.0;
};

// Grid argmin of |mean|, smallest index on ties.
std::size_t argmin_index(std::span<const double> values);

Incumbent incumbent(const PosteriorSnapshot& post, const Grid& grid);

// Unnormalized proxy scores from posterior moments on a grid.
//   mean[i], variance[i]   marginal moments at grid point i
//   cov_with_incumbent[i]  Cov[f(x_i), f(x_inc)]; may be empty in independent mode
// At i == inc, or when the standardizing denominator falls below 1e-12, the
// score is the step convention 1 / 0.5 / 0 for mu(x) below / equal / above
// mu(x_inc). In covariance mode a vanishing denominator first falls back to
// the independent formula.
std::vector<double> proxy_scores(std::span<const double> mean, std::span<const double> variance,
                                 std::span<const double> cov_with_incumbent, std::size_t inc,
                                 CovarianceMode mode, double variance_scale = 1.0);

MinimizerDistribution normalize_scores(std::span<const double> scores);

std::vector<double> proxy_scores(const PosteriorSnapshot& post, const Grid& grid,
                                 const Incumbent& inc, CovarianceMode mode);

MinimizerDistribution proxy_distribution(const PosteriorSnapshot& post, const Grid& grid,
                                         const Incumbent& inc, CovarianceMode mode);

// Shannon entropy in nats, 0 log 0 = 0.
double entropy(const MinimizerDistribution& dist);
double entropy(std::span<const double> probabilities);

// KL(p_true || q) in nats; +infinity when q vanishes on the support of p_true.
double kl_divergence(const MinimizerDistribution& p_true, const MinimizerDistribution& q);

// Histogram of per-sample argmin indices over |count| joint posterior samples.
MinimizerDistribution sampled_minimizer_distribution(const PosteriorSnapshot& post, const Grid& grid,
                                                     int count, Rng& rng);
MinimizerDistribution sampled_minimizer_distribution(const JointPrediction& joint, int count, Rng& rng,
                                                     double variance_floor = 0.0);

double total_variation(const MinimizerDistribution& p, const MinimizerDistribution& q);

}  // namespace mme

#endif  // MME_MINIMIZER_POSTERIOR_HPP_
