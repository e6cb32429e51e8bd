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

#include "mme/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/LU>

#include "mme/gp.hpp"
#include "mme/grid.hpp"
#include "mme/minimizer_posterior.hpp"

namespace mme {

namespace {

struct Case {
  Dataset data;
  Hyperparameters hp;
};

Case random_case(Rng& rng, int max_n, int dim) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> count(1, max_n);
  Case c;
  c.hp.lengthscale = 0.1 + 0.9 * unit(rng);
  c.hp.signal_variance = 0.5 + 1.5 * unit(rng);
  c.hp.noise_variance = c.hp.signal_variance * std::pow(10.0, -3.0 + 2.0 * unit(rng));
  c.hp.mean_const = -1.0 + 2.0 * unit(rng);
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    Point x(dim);
    for (int k = 0; k < dim; ++k) x[k] = unit(rng);
    c.data.add(x, std::sin(6.0 * x.sum()) + 0.3 * unit(rng));
  }
  return c;
}

SelfcheckResult check_inverse(Rng& rng) {
  SelfcheckResult r{"posterior_inverse", true, 0.0, 1e-8, ""};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    const int dim = 1 + t % 2;
    const Case c = random_case(rng, 30, dim);
    const PosteriorSnapshot post = build_posterior(c.data, c.hp);
    std::vector<Point> query;
    for (int q = 0; q < 12; ++q) {
      Point x(dim);
      for (int k = 0; k < dim; ++k) x[k] = -0.2 + 1.4 * unit(rng);
      query.push_back(x);
    }
    const JointPrediction jp = predict_joint(post, query);

    Eigen::MatrixXd k = kernel_matrix(c.data.points, c.data.points, c.hp);
    k.diagonal().array() += c.hp.noise_variance + post.jitter();
    const Eigen::MatrixXd kinv = k.fullPivLu().inverse();
    const Eigen::MatrixXd kxq = kernel_matrix(c.data.points, query, c.hp);
    const Eigen::VectorXd r0 = c.data.observation_vector().array() - c.hp.mean_const;
    const Eigen::VectorXd mean = (kxq.transpose() * (kinv * r0)).array() + c.hp.mean_const;
    Eigen::MatrixXd cov = kernel_matrix(query, query, c.hp) - kxq.transpose() * kinv * kxq;
    const double err = std::max((mean - jp.mean).cwiseAbs().maxCoeff(),
                                (cov - jp.covariance).cwiseAbs().maxCoeff());
    r.worst = std::max(r.worst, err);
  }
  r.passed = r.worst <= r.tolerance;
  r.detail = "50 random datasets, n <= 30, d <= 2";
  return r;
}

SelfcheckResult check_gradient(Rng& rng) {
  SelfcheckResult r{"evidence_gradient", true, 0.0, 1e-4, ""};
  const double h = 1e-5;
  for (int t = 0; t < 20; ++t) {
    const Case c = random_case(rng, 10, 1 + t % 2);
    const Evidence ev = log_evidence(c.data, c.hp);
    for (int p = 0; p < 4; ++p) {
      auto shifted = [&](double delta) {
        Hyperparameters hp = c.hp;
        switch (p) {
          case 0: hp.lengthscale *= std::exp(delta); break;
          case 1: hp.signal_variance *= std::exp(delta); break;
          case 2: hp.noise_variance *= std::exp(delta); break;
          default: hp.mean_const += delta; break;
        }
        return log_evidence(c.data, hp).value;
      };
      const double fd = (shifted(h) - shifted(-h)) / (2.0 * h);
      const double analytic = ev.gradient[static_cast<std::size_t>(p)];
      const double rel = std::abs(analytic - fd) / std::max({std::abs(fd), std::abs(analytic), 1e-4});
      r.worst = std::max(r.worst, rel);
    }
  }
  r.passed = r.worst <= r.tolerance;
  r.detail = "20 random configurations, central differences with step 1e-5";
  return r;
}

SelfcheckResult check_bound(Rng& rng, int samples) {
  SelfcheckResult r{"proxy_bound", true, 0.0, 3.0, ""};
  for (int t = 0; t < 10; ++t) {
    const int dim = 1 + t % 2;
    const Grid grid = dim == 1 ? Grid(Box{{0.0}, {1.0}}, {25}) : Grid(Box{{0.0, 0.0}, {1.0, 1.0}}, {5, 5});
    const Case c = random_case(rng, 8, dim);
    const PosteriorSnapshot post = build_posterior(c.data, c.hp);
    const Incumbent inc = incumbent(post, grid);
    const std::vector<double> scores = proxy_scores(post, grid, inc, CovarianceMode::kWithCovariance);
    const MinimizerDistribution freq = sampled_minimizer_distribution(post, grid, samples, rng);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double p = freq.probabilities[i];
      const double se = std::sqrt(std::max(p * (1.0 - p), 1.0 / samples) / samples);
      // f(x) - f(x_inc) vanishes identically at the incumbent, where the
      // bounding probability is exactly 1.
      const double bound = i == inc.index ? 1.0 : scores[i];
      // Excess in units of the binomial standard error.
      r.worst = std::max(r.worst, (p - bound) / se);
    }
  }
  r.passed = r.worst <= r.tolerance;
  std::ostringstream os;
  os << "10 random posteriors over 25-point grids, " << samples << " samples each; worst is in standard errors";
  r.detail = os.str();
  return r;
}

}  // namespace

std::vector<SelfcheckResult> run_selfcheck(std::uint64_t seed, int bound_samples) {
  Rng rng(seed);
  std::vector<SelfcheckResult> out;
  out.push_back(check_inverse(rng));
  out.push_back(check_gradient(rng));
  out.push_back(check_bound(rng, bound_samples));
  return out;
}

}  // namespace mme
