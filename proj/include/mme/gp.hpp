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

// Gaussian-process regression with an isotropic squared-exponential kernel and
// a constant mean function.
//
//   k(a, b) = signal_variance * exp(-|a - b|^2 / (2 * lengthscale^2))
//   y_i     = f(x_i) + eps_i,   eps_i ~ N(0, noise_variance)
//
// The posterior is held in an immutable PosteriorSnapshot: the Cholesky factor
// of K + (noise_variance + jitter) I and the weights (K + ...)^{-1} (y - m).
// Everything downstream (minimizer distributions, acquisition criteria) only
// queries snapshots, so a snapshot can be shared freely across threads.

#ifndef MME_GP_HPP_
#define MME_GP_HPP_

#include <array>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Cholesky>

#include "mme/common.hpp"
#include "mme/errors.hpp"

namespace mme {

struct Hyperparameters {
  double lengthscale = 1.0;
  double signal_variance = 1.0;
  double noise_variance = 0.01;  // sigma^2 of the observation model
  double mean_const = 0.0;

  // Throws UsageError unless lengthscale > 0, signal_variance > 0,
  // noise_variance >= 0 and all four values are finite.
  void validate() const;
  std::string to_string() const;

  friend bool operator==(const Hyperparameters&, const Hyperparameters&) = default;
};

struct Dataset {
  std::vector<Point> points;
  std::vector<double> observations;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  // -1 for an empty dataset.
  int dimension() const { return points.empty() ? -1 : static_cast<int>(points.front().size()); }

  void add(const Point& x, double y) {
    points.push_back(x);
    observations.push_back(y);
  }

  // Equal lengths, consistent dimensions, finite values, and (when given) every
  // point inside |domain|.
  void validate(const Box* domain = nullptr) const;

  Eigen::VectorXd observation_vector() const;
};

double kernel_eval(const Point& a, const Point& b, const Hyperparameters& hp);

// Kernel matrix between two point sets.
Eigen::MatrixXd kernel_matrix(std::span<const Point> a, std::span<const Point> b,
                              const Hyperparameters& hp);

// Fitted GP state; immutable after construction.
class PosteriorSnapshot {
 public:
  const Dataset& dataset() const { return data_; }
  const Hyperparameters& hyperparameters() const { return hp_; }
  // Lower-triangular L with L L^T = K + (noise_variance + jitter) I.
  const Eigen::MatrixXd& chol_factor() const { return chol_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  // Diagonal inflation that was actually needed to factorize.
  double jitter() const { return jitter_; }
  std::size_t size() const { return data_.size(); }

 private:
  friend PosteriorSnapshot build_posterior(Dataset data, const Hyperparameters& hp);

  Dataset data_;
  Hyperparameters hp_;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd weights_;
  double jitter_ = 0.0;
};

// Jitter starts at 1e-10 * signal_variance and is escalated x10 up to
// 1e-6 * signal_variance before giving up with NumericalError.
PosteriorSnapshot build_posterior(Dataset data, const Hyperparameters& hp);

struct JointPrediction {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // latent f, noise-free
};

// Joint posterior of f at |query|. The covariance diagonal is clamped at zero.
JointPrediction predict_joint(const PosteriorSnapshot& post, std::span<const Point> query);

struct MarginalPrediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
};

// Same means and diagonal as predict_joint, without forming the full matrix.
MarginalPrediction predict_marginal(const PosteriorSnapshot& post, std::span<const Point> query);

// Log marginal likelihood log N(y; m 1, K + sigma^2 I) and its gradient with
// respect to (log lengthscale, log signal_variance, log noise_variance, mean_const).
struct Evidence {
  double value = 0.0;
  std::array<double, 4> gradient{};
};

Evidence log_evidence(const Dataset& data, const Hyperparameters& hp);

// Box over the hyperparameters; positive parameters are searched in log-space.
struct HyperparameterBounds {
  std::array<double, 2> lengthscale{1e-3, 1e3};
  std::array<double, 2> signal_variance{1e-3, 1e3};
  std::array<double, 2> noise_variance{1e-9, 1e3};
  std::array<double, 2> mean_const{-1e3, 1e3};

  void validate() const;
  bool contains(const Hyperparameters& hp, double rel_tol = 1e-12) const;
  Hyperparameters clamp(const Hyperparameters& hp) const;
};

// Bounds scaled to the data: lengthscale in [1e-3, 1e3] x domain diagonal,
// signal variance in [1e-3, 1e3] x var(y), noise variance in [1e-6, 1e3] x
// var(y), constant mean within 10 standard deviations of the observed range.
HyperparameterBounds default_bounds(const Dataset& data, const Box& domain);

// Hyperparameters used while fewer than two observations are available.
Hyperparameters default_hyperparameters(const Dataset& data, const Box& domain);

// Carries the best hyperparameters reached before every restart failed, when
// any evaluation succeeded at all.
class FitError : public NumericalError {
 public:
  FitError(const std::string& what, bool has_partial, const Hyperparameters& best)
      : NumericalError(what), has_partial_(has_partial), best_(best) {}
  bool has_partial() const { return has_partial_; }
  const Hyperparameters& best_partial() const { return best_; }

 private:
  bool has_partial_;
  Hyperparameters best_;
};

struct FitOptions {
  int max_iterations = 200;
  double tolerance = 1e-9;  // relative change of the objective
};

// Evidence maximization by projected quasi-Newton ascent with backtracking
// line search from |restarts| random initializations (plus any |warm_starts|).
// Deterministic given the generator state.
Hyperparameters fit_hyperparameters(const Dataset& data, int restarts,
                                    const HyperparameterBounds& bounds, Rng& rng,
                                    std::span<const Hyperparameters> warm_starts = {},
                                    const FitOptions& options = {});

// Draws joint samples mean + T z with T T^T = covariance. T comes from a
// symmetric eigendecomposition with negative eigenvalues clamped to zero, so
// directions with zero posterior variance stay exactly at the mean. Points
// whose variance is at most |variance_floor| (typically the factorization
// jitter) are held at the mean as well.
class FunctionSampler {
 public:
  explicit FunctionSampler(const JointPrediction& joint, double variance_floor = 0.0);

  // Returns a (grid size) x count matrix; column j is sample j.
  Eigen::MatrixXd draw(Rng& rng, int count) const;
  const Eigen::VectorXd& mean() const { return mean_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd transform_;
};

// Variance at or below which a grid point is sampled deterministically: the
// factorization jitter plus cancellation error in sf^2 - k^T K^-1 k.
double sampling_variance_floor(const PosteriorSnapshot& post);

Eigen::MatrixXd sample_functions(const PosteriorSnapshot& post, std::span<const Point> grid,
                                 int count, Rng& rng);

}  // namespace mme

#endif  // MME_GP_HPP_
