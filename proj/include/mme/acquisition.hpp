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

// Acquisition criteria over a finite candidate grid.
//
// MME scores a candidate c by the expected entropy of the proxy minimizer
// distribution after a hypothetical observation y at c:
//
//   score(c) = E_y[ H(proxy | D u {(c, y)}) ],   y ~ N(mu(c), v(c) + sigma^2)
//
// with hyperparameters held fixed. Conditioning a GP on one more observation
// is a rank-one update of the grid moments,
//
//   mu'(x)     = mu(x) + S(x, c) (y - mu(c)) / s2
//   S'(x, x')  = S(x, x') - S(x, c) S(x', c) / s2,    s2 = v(c) + sigma^2 + jitter
//
// so each Monte Carlo draw costs O(grid) once the joint grid posterior is known.
// The fast variant replaces the expectation by the single draw y = mu(c).
//
// Baselines: expected improvement (MEI), probability of improvement (PI) and
// posterior variance (uncertainty sampling).

#ifndef MME_ACQUISITION_HPP_
#define MME_ACQUISITION_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mme/common.hpp"
#include "mme/gp.hpp"
#include "mme/grid.hpp"
#include "mme/minimizer_posterior.hpp"

namespace mme {

enum class Criterion { kMme, kFastMme, kMei, kPi, kVariance };

std::string to_string(Criterion c);
// Accepts mme, fast_mme, mei, pi (or kushner_pi), variance.
Criterion parse_criterion(const std::string& text);

enum class Direction { kMinimize, kMaximize };

// MME variants minimize, baselines maximize.
Direction direction_for(Criterion c);

struct AcquisitionConfig {
  Criterion criterion = Criterion::kMme;
  int mc_samples = 30;
  double epsilon = 0.0;
  CovarianceMode cov_mode = CovarianceMode::kIndependent;

  void validate() const;
};

// Monte Carlo estimate with its standard error.
struct EntropyEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

// Joint posterior over the grid, computed once per acquisition round, and the
// hypothetical-observation machinery built on it. Immutable; safe to share.
// Keeps references to |post| and |grid|, which must outlive it.
class GridPosterior {
 public:
  GridPosterior(const PosteriorSnapshot& post, const Grid& grid);

  const Eigen::VectorXd& mean() const { return joint_.mean; }
  const Eigen::MatrixXd& covariance() const { return joint_.covariance; }
  std::size_t size() const { return static_cast<std::size_t>(joint_.mean.size()); }
  const PosteriorSnapshot& snapshot() const { return *post_; }
  const Grid& grid() const { return *grid_; }

  // Proxy entropy of the current posterior.
  double current_entropy(CovarianceMode mode) const;

  // Entropy of the proxy after observing |y| at grid index |candidate|.
  double entropy_after(std::size_t candidate, double y, CovarianceMode mode) const;

  // Predictive variance v(c) + sigma^2 + jitter of an observation at |candidate|.
  double predictive_variance(std::size_t candidate) const;

  EntropyEstimate mme(std::size_t candidate, int mc_samples, CovarianceMode mode, Rng& rng) const;
  double fast_mme(std::size_t candidate, CovarianceMode mode) const;

  // General form: |cross| is Cov[f(grid), f(c)], |cand_mean| = mu(c) and
  // |s2| the predictive variance of the observation at c.
  double entropy_after(const Eigen::VectorXd& cross, double cand_mean, double s2, double y,
                       CovarianceMode mode) const;

 private:
  const PosteriorSnapshot* post_;
  const Grid* grid_;
  JointPrediction joint_;
};

// Expected entropy of the proxy after one hypothetical observation at
// |candidate| (any point of the domain), averaged over cfg.mc_samples draws.
double mme_score(const Dataset& data, const Hyperparameters& hp, const Point& candidate,
                 const Grid& grid, const AcquisitionConfig& cfg, Rng& rng);
EntropyEstimate mme_estimate(const Dataset& data, const Hyperparameters& hp, const Point& candidate,
                             const Grid& grid, const AcquisitionConfig& cfg, Rng& rng);

// Proxy entropy after appending (candidate, mu(candidate)); no randomness.
double fast_mme_score(const Dataset& data, const Hyperparameters& hp, const Point& candidate,
                      const Grid& grid, const AcquisitionConfig& cfg);

// Closed forms on a Gaussian N(mu, sigma^2) against threshold f* - epsilon.
double expected_improvement(double mu, double sigma, double incumbent_value, double epsilon);
double probability_of_improvement(double mu, double sigma, double incumbent_value, double epsilon);

double mei_score(const PosteriorSnapshot& post, const Point& candidate, double incumbent_value,
                 double epsilon);
double pi_score(const PosteriorSnapshot& post, const Point& candidate, double incumbent_value,
                double epsilon);
double variance_score(const PosteriorSnapshot& post, const Point& candidate);

// Scores every grid point under cfg.criterion. MME draws use a generator
// seeded from (run_seed, iteration, candidate index), so the result does not
// depend on evaluation order or thread count.
std::vector<double> score_grid(const GridPosterior& gp, const AcquisitionConfig& cfg,
                               std::uint64_t run_seed, std::uint64_t iteration, int threads = 1);

// Extremal index, smallest on ties. Throws UsageError on empty input or any
// non-finite score.
std::size_t select_next(std::span<const double> scores, Direction direction);

}  // namespace mme

#endif  // MME_ACQUISITION_HPP_
