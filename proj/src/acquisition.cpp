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

#include "mme/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "mme/errors.hpp"

namespace mme {

namespace {

constexpr double kSigmaFloor = 1e-12;

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

std::string to_string(Criterion c) {
  switch (c) {
    case Criterion::kMme: return "mme";
    case Criterion::kFastMme: return "fast_mme";
    case Criterion::kMei: return "mei";
    case Criterion::kPi: return "pi";
    case Criterion::kVariance: return "variance";
  }
  return "unknown";
}

Criterion parse_criterion(const std::string& text) {
  if (text == "mme") return Criterion::kMme;
  if (text == "fast_mme" || text == "fast-mme") return Criterion::kFastMme;
  if (text == "mei") return Criterion::kMei;
  if (text == "pi" || text == "kushner_pi") return Criterion::kPi;
  if (text == "variance") return Criterion::kVariance;
  throw UsageError("unknown criterion '" + text + "' (expected mme|fast_mme|mei|pi|variance)");
}

Direction direction_for(Criterion c) {
  return (c == Criterion::kMme || c == Criterion::kFastMme) ? Direction::kMinimize : Direction::kMaximize;
}

void AcquisitionConfig::validate() const {
  if (criterion == Criterion::kMme && mc_samples < 1)
    throw UsageError("mc_samples must be >= 1 for the mme criterion, got " + std::to_string(mc_samples));
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw UsageError("epsilon must be finite and >= 0");
}

GridPosterior::GridPosterior(const PosteriorSnapshot& post, const Grid& grid)
    : post_(&post), grid_(&grid), joint_(predict_joint(post, grid.points())) {}

double GridPosterior::current_entropy(CovarianceMode mode) const {
  const std::size_t inc = argmin_index(as_span(joint_.mean));
  const Eigen::VectorXd var = joint_.covariance.diagonal();
  Eigen::VectorXd col;
  if (mode == CovarianceMode::kWithCovariance) col = joint_.covariance.col(static_cast<Eigen::Index>(inc));
  const std::vector<double> s = proxy_scores(as_span(joint_.mean), as_span(var), as_span(col), inc, mode,
                                             post_->hyperparameters().signal_variance);
  return entropy(normalize_scores(s));
}

double GridPosterior::predictive_variance(std::size_t candidate) const {
  const auto c = static_cast<Eigen::Index>(candidate);
  return joint_.covariance(c, c) + post_->hyperparameters().noise_variance + post_->jitter();
}

double GridPosterior::entropy_after(const Eigen::VectorXd& cross, double cand_mean, double s2, double y,
                                    CovarianceMode mode) const {
  const Eigen::VectorXd mean = joint_.mean + cross * ((y - cand_mean) / s2);
  const Eigen::VectorXd var = joint_.covariance.diagonal() - cross.cwiseAbs2() / s2;
  const std::size_t inc = argmin_index(as_span(mean));
  Eigen::VectorXd col;
  if (mode == CovarianceMode::kWithCovariance) {
    const auto ii = static_cast<Eigen::Index>(inc);
    col = joint_.covariance.col(ii) - cross * (cross[ii] / s2);
  }
  const std::vector<double> s = proxy_scores(as_span(mean), as_span(var), as_span(col), inc, mode,
                                             post_->hyperparameters().signal_variance);
  return entropy(normalize_scores(s));
}

double GridPosterior::entropy_after(std::size_t candidate, double y, CovarianceMode mode) const {
  const auto c = static_cast<Eigen::Index>(candidate);
  return entropy_after(joint_.covariance.col(c), joint_.mean[c], predictive_variance(candidate), y, mode);
}

EntropyEstimate GridPosterior::mme(std::size_t candidate, int mc_samples, CovarianceMode mode, Rng& rng) const {
  if (mc_samples < 1) throw UsageError("mc_samples must be >= 1");
  const auto c = static_cast<Eigen::Index>(candidate);
  const Eigen::VectorXd cross = joint_.covariance.col(c);
  const double s2 = predictive_variance(candidate);
  const double sd = std::sqrt(std::max(s2, 0.0));
  std::normal_distribution<double> normal(0.0, 1.0);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int j = 0; j < mc_samples; ++j) {
    const double y = joint_.mean[c] + sd * normal(rng);
    const double h = entropy_after(cross, joint_.mean[c], s2, y, mode);
    sum += h;
    sum_sq += h * h;
  }
  const double m = static_cast<double>(mc_samples);
  EntropyEstimate est;
  est.mean = sum / m;
  if (mc_samples > 1) {
    const double var = std::max(sum_sq - m * est.mean * est.mean, 0.0) / (m - 1.0);
    est.std_error = std::sqrt(var / m);
  }
  return est;
}

double GridPosterior::fast_mme(std::size_t candidate, CovarianceMode mode) const {
  const auto c = static_cast<Eigen::Index>(candidate);
  return entropy_after(candidate, joint_.mean[c], mode);
}

namespace {

// Moments of the grid plus one extra point, for off-grid candidates.
struct CandidateMoments {
  Eigen::VectorXd cross;
  double mean = 0.0;
  double variance = 0.0;
};

CandidateMoments candidate_moments(const PosteriorSnapshot& post, const Grid& grid, const Point& candidate) {
  std::vector<Point> pts = grid.points();
  pts.push_back(candidate);
  const JointPrediction j = predict_joint(post, pts);
  const auto g = static_cast<Eigen::Index>(grid.size());
  return {j.covariance.col(g).head(g), j.mean[g], j.covariance(g, g)};
}

void check_candidate(const Grid& grid, const Point& candidate) {
  if (static_cast<std::size_t>(candidate.size()) != grid.dimension())
    throw UsageError("candidate dimension does not match the grid");
}

}  // namespace

EntropyEstimate mme_estimate(const Dataset& data, const Hyperparameters& hp, const Point& candidate,
                             const Grid& grid, const AcquisitionConfig& cfg, Rng& rng) {
  if (cfg.mc_samples < 1) throw UsageError("mc_samples must be >= 1, got " + std::to_string(cfg.mc_samples));
  cfg.validate();
  check_candidate(grid, candidate);
  const PosteriorSnapshot post = build_posterior(data, hp);
  const GridPosterior gp(post, grid);
  const CandidateMoments cm = candidate_moments(post, grid, candidate);
  const double s2 = cm.variance + hp.noise_variance + post.jitter();
  const double sd = std::sqrt(std::max(s2, 0.0));
  std::normal_distribution<double> normal(0.0, 1.0);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int j = 0; j < cfg.mc_samples; ++j) {
    const double y = cm.mean + sd * normal(rng);
    const double h = gp.entropy_after(cm.cross, cm.mean, s2, y, cfg.cov_mode);
    sum += h;
    sum_sq += h * h;
  }
  const double m = static_cast<double>(cfg.mc_samples);
  EntropyEstimate est;
  est.mean = sum / m;
  if (cfg.mc_samples > 1) est.std_error = std::sqrt(std::max(sum_sq - m * est.mean * est.mean, 0.0) / (m - 1.0) / m);
  return est;
}

double mme_score(const Dataset& data, const Hyperparameters& hp, const Point& candidate, const Grid& grid,
                 const AcquisitionConfig& cfg, Rng& rng) {
  return mme_estimate(data, hp, candidate, grid, cfg, rng).mean;
}

double fast_mme_score(const Dataset& data, const Hyperparameters& hp, const Point& candidate,
                      const Grid& grid, const AcquisitionConfig& cfg) {
  check_candidate(grid, candidate);
  const PosteriorSnapshot post = build_posterior(data, hp);
  const double mu = predict_marginal(post, std::span<const Point>(&candidate, 1)).mean[0];
  Dataset extended = data;
  extended.add(candidate, mu);
  const PosteriorSnapshot next = build_posterior(std::move(extended), hp);
  const Incumbent inc = incumbent(next, grid);
  return entropy(proxy_distribution(next, grid, inc, cfg.cov_mode));
}

double expected_improvement(double mu, double sigma, double incumbent_value, double epsilon) {
  const double imp = incumbent_value - epsilon - mu;
  if (!(sigma >= kSigmaFloor)) return std::max(imp, 0.0);
  const double z = imp / sigma;
  const double ei = imp * normal_cdf(z) + sigma * normal_pdf(z);
  return std::max({ei, imp, 0.0});
}

double probability_of_improvement(double mu, double sigma, double incumbent_value, double epsilon) {
  const double imp = incumbent_value - epsilon - mu;
  if (!(sigma >= kSigmaFloor)) return imp > 0.0 ? 1.0 : (imp == 0.0 ? 0.5 : 0.0);
  return normal_cdf(imp / sigma);
}

namespace {

MarginalPrediction single(const PosteriorSnapshot& post, const Point& candidate) {
  return predict_marginal(post, std::span<const Point>(&candidate, 1));
}

}  // namespace

double mei_score(const PosteriorSnapshot& post, const Point& candidate, double incumbent_value, double epsilon) {
  const MarginalPrediction p = single(post, candidate);
  return expected_improvement(p.mean[0], std::sqrt(p.variance[0]), incumbent_value, epsilon);
}

double pi_score(const PosteriorSnapshot& post, const Point& candidate, double incumbent_value, double epsilon) {
  const MarginalPrediction p = single(post, candidate);
  return probability_of_improvement(p.mean[0], std::sqrt(p.variance[0]), incumbent_value, epsilon);
}

double variance_score(const PosteriorSnapshot& post, const Point& candidate) {
  return single(post, candidate).variance[0];
}

std::vector<double> score_grid(const GridPosterior& gp, const AcquisitionConfig& cfg, std::uint64_t run_seed,
                               std::uint64_t iteration, int threads) {
  cfg.validate();
  const std::size_t n = gp.size();
  std::vector<double> scores(n, 0.0);
  const Eigen::VectorXd var = gp.covariance().diagonal();
  const double f_star = gp.mean()[static_cast<Eigen::Index>(argmin_index(as_span(gp.mean())))];

  auto score_one = [&](std::size_t i) {
    const auto ii = static_cast<Eigen::Index>(i);
    switch (cfg.criterion) {
      case Criterion::kMme: {
        Rng rng(derive_seed(run_seed, iteration, i));
        scores[i] = gp.mme(i, cfg.mc_samples, cfg.cov_mode, rng).mean;
        break;
      }
      case Criterion::kFastMme:
        scores[i] = gp.fast_mme(i, cfg.cov_mode);
        break;
      case Criterion::kMei:
        scores[i] = expected_improvement(gp.mean()[ii], std::sqrt(var[ii]), f_star, cfg.epsilon);
        break;
      case Criterion::kPi:
        scores[i] = probability_of_improvement(gp.mean()[ii], std::sqrt(var[ii]), f_star, cfg.epsilon);
        break;
      case Criterion::kVariance:
        scores[i] = var[ii];
        break;
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(threads), n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) score_one(i);
    return scores;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) score_one(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return scores;
}

std::size_t select_next(std::span<const double> scores, Direction direction) {
  if (scores.empty()) throw UsageError("select_next: no scores");
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (!std::isfinite(scores[i])) throw UsageError("select_next: non-finite score at index " + std::to_string(i));
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    const bool better = direction == Direction::kMinimize ? scores[i] < scores[best] : scores[i] > scores[best];
    if (better) best = i;
  }
  return best;
}

}  // namespace mme
