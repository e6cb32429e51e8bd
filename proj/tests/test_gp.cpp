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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "mme/gp.hpp"
#include "oracles.hpp"

using namespace mme;

namespace {

Point pt(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) p[k++] = x;
  return p;
}

oracle::Hp to_oracle(const Hyperparameters& hp) {
  return {hp.lengthscale, hp.signal_variance, hp.noise_variance, hp.mean_const};
}

struct RandomCase {
  Dataset data;
  Hyperparameters hp;
};

RandomCase random_case(std::mt19937_64& rng, int n, int dim) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RandomCase c;
  c.hp.lengthscale = 0.1 + 0.9 * u(rng);
  c.hp.signal_variance = 0.5 + 1.5 * u(rng);
  c.hp.noise_variance = c.hp.signal_variance * std::pow(10.0, -3.0 + 2.0 * u(rng));
  c.hp.mean_const = -1.0 + 2.0 * u(rng);
  for (int i = 0; i < n; ++i) {
    Point x(dim);
    for (int k = 0; k < dim; ++k) x[k] = u(rng);
    c.data.add(x, std::cos(5.0 * x.sum()) + 0.2 * u(rng));
  }
  return c;
}

std::vector<Point> random_points(std::mt19937_64& rng, int m, int dim, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Point> q;
  for (int i = 0; i < m; ++i) {
    Point x(dim);
    for (int k = 0; k < dim; ++k) x[k] = u(rng);
    q.push_back(x);
  }
  return q;
}

}  // namespace

TEST_CASE("kernel_eval closed forms") {
  Hyperparameters hp{1.0, 2.0, 0.0, 0.0};
  CHECK(kernel_eval(pt({0.3, -0.2}), pt({0.3, -0.2}), hp) == doctest::Approx(2.0).epsilon(1e-15));
  hp.signal_variance = 1.0;
  CHECK(kernel_eval(pt({0.0}), pt({1.0}), hp) == doctest::Approx(0.6065306597126334).epsilon(1e-14));

  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const auto ab = random_points(rng, 2, 2, -3.0, 3.0);
    hp.lengthscale = 0.3 + t * 0.1;
    CHECK(kernel_eval(ab[0], ab[1], hp) == kernel_eval(ab[1], ab[0], hp));
  }
  CHECK_THROWS_AS(kernel_eval(pt({0.0}), pt({0.0, 1.0}), hp), UsageError);
}

TEST_CASE("hyperparameter validation") {
  CHECK_NOTHROW(Hyperparameters{0.5, 1.0, 0.0, -3.0}.validate());
  CHECK_THROWS_AS(Hyperparameters({0.0, 1.0, 0.1, 0.0}).validate(), UsageError);
  CHECK_THROWS_AS(Hyperparameters({1.0, -1.0, 0.1, 0.0}).validate(), UsageError);
  CHECK_THROWS_AS(Hyperparameters({1.0, 1.0, -0.1, 0.0}).validate(), UsageError);
  CHECK_THROWS_AS(Hyperparameters({1.0, 1.0, 0.1, std::nan("")}).validate(), UsageError);
}

TEST_CASE("dataset validation") {
  Dataset d;
  d.add(pt({0.5}), 1.0);
  const Box box{{0.0}, {1.0}};
  CHECK_NOTHROW(d.validate(&box));
  d.add(pt({1.5}), 1.0);
  CHECK_THROWS_AS(d.validate(&box), UsageError);
  Dataset mixed;
  mixed.add(pt({0.5}), 1.0);
  mixed.add(pt({0.5, 0.5}), 1.0);
  CHECK_THROWS_AS(mixed.validate(), UsageError);
  Dataset ragged;
  ragged.points.push_back(pt({0.1}));
  CHECK_THROWS_AS(ragged.validate(), UsageError);
}

TEST_CASE("empty posterior returns the prior") {
  const Hyperparameters hp{0.4, 1.7, 0.01, 0.25};
  const PosteriorSnapshot post = build_posterior(Dataset{}, hp);
  CHECK(post.size() == 0);
  std::mt19937_64 rng(5);
  const auto q = random_points(rng, 6, 2, 0.0, 1.0);
  const JointPrediction jp = predict_joint(post, q);
  const oracle::Joint ref = oracle::posterior({}, {}, to_oracle(hp), q);
  CHECK((jp.mean.array() - 0.25).abs().maxCoeff() == 0.0);
  CHECK((jp.covariance - ref.cov).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("single noiseless observation is interpolated") {
  Dataset d;
  d.add(pt({0.2}), -0.7);
  const PosteriorSnapshot post = build_posterior(d, Hyperparameters{0.3, 1.0, 0.0, 0.0});
  const JointPrediction jp = predict_joint(post, std::vector<Point>{pt({0.2})});
  CHECK(jp.mean[0] == doctest::Approx(-0.7).epsilon(1e-8));
  CHECK(jp.covariance(0, 0) < 1e-8);
}

TEST_CASE("cholesky factor reconstructs the regularized kernel") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 10; ++t) {
    const RandomCase c = random_case(rng, 5 + t * 2, 1 + t % 2);
    const PosteriorSnapshot post = build_posterior(c.data, c.hp);
    const Eigen::MatrixXd& l = post.chol_factor();
    CHECK(l.isLowerTriangular());
    CHECK(l.diagonal().minCoeff() > 0.0);
    oracle::Mat k = oracle::gram(c.data.points, c.data.points, to_oracle(c.hp));
    k.diagonal().array() += c.hp.noise_variance + post.jitter();
    const double rel = (l * l.transpose() - k).norm() / k.norm();
    CHECK(rel < 1e-10);
    CHECK(post.jitter() == doctest::Approx(1e-10 * c.hp.signal_variance));
  }
}

TEST_CASE("predictions match the direct-inverse oracle") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 30; ++t) {
    const int dim = 1 + t % 2;
    const RandomCase c = random_case(rng, t == 0 ? 20 : 1 + static_cast<int>(rng() % 30), dim);
    const PosteriorSnapshot post = build_posterior(c.data, c.hp);
    const auto q = random_points(rng, 15, dim, -0.25, 1.25);
    const JointPrediction jp = predict_joint(post, q);
    const oracle::Joint ref =
        oracle::posterior(c.data.points, c.data.observations, to_oracle(c.hp), q, post.jitter());
    CHECK((jp.mean - ref.mean).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((jp.covariance - ref.cov).cwiseAbs().maxCoeff() < 1e-8);

    const MarginalPrediction mp = predict_marginal(post, q);
    CHECK((mp.mean - jp.mean).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((mp.variance - jp.covariance.diagonal()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("posterior covariance properties") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 15; ++t) {
    const int dim = 1 + t % 2;
    const RandomCase c = random_case(rng, 3 + t, dim);
    const PosteriorSnapshot post = build_posterior(c.data, c.hp);
    const auto q = random_points(rng, 25, dim, 0.0, 1.0);
    const JointPrediction jp = predict_joint(post, q);
    CHECK(jp.covariance.isApprox(jp.covariance.transpose(), 0.0));
    CHECK(jp.covariance.diagonal().maxCoeff() <= c.hp.signal_variance + 1e-10);
    CHECK(jp.covariance.diagonal().minCoeff() >= 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jp.covariance);
    CHECK(es.eigenvalues().minCoeff() >= -1e-8 * c.hp.signal_variance);

    // An extra observation only shrinks the variance.
    Dataset more = c.data;
    more.add(random_points(rng, 1, dim, 0.0, 1.0)[0], 0.3);
    const MarginalPrediction after = predict_marginal(build_posterior(more, c.hp), q);
    CHECK((after.variance - jp.covariance.diagonal()).maxCoeff() <= 1e-8);
  }
}

TEST_CASE("far-away queries revert to the prior variance") {
  std::mt19937_64 rng(29);
  const RandomCase c = random_case(rng, 12, 2);
  const PosteriorSnapshot post = build_posterior(c.data, c.hp);
  const MarginalPrediction mp = predict_marginal(post, std::vector<Point>{pt({60.0, -40.0})});
  CHECK(std::abs(mp.variance[0] - c.hp.signal_variance) < 1e-6);
  CHECK(std::abs(mp.mean[0] - c.hp.mean_const) < 1e-6);
}

TEST_CASE("noiseless data is interpolated") {
  // Perturbed lattice designs: the error term is jitter times the weights, so
  // nearly coincident points would measure conditioning rather than the model.
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (int t = 0; t < 5; ++t) {
    const int dim = 1 + t % 2;
    RandomCase c;
    c.hp = Hyperparameters{0.2, 0.5 + 0.3 * t, 0.0, 0.1 * t};
    const int side = dim == 1 ? 8 : 3;
    for (int i = 0; i < (dim == 1 ? side : side * side); ++i) {
      Point x(dim);
      x[0] = (i % side + 0.5 + u(rng)) / side;
      if (dim == 2) x[1] = (i / side + 0.5 + u(rng)) / side;
      c.data.add(x, std::sin(4.0 * x.sum()) + u(rng));
    }
    const PosteriorSnapshot post = build_posterior(c.data, c.hp);
    const MarginalPrediction mp = predict_marginal(post, c.data.points);
    for (std::size_t i = 0; i < c.data.size(); ++i)
      CHECK(std::abs(mp.mean[static_cast<Eigen::Index>(i)] - c.data.observations[i]) <= 1e-6);
  }
}

TEST_CASE("duplicate noiseless points factorize after jitter escalation") {
  Dataset d;
  for (int i = 0; i < 4; ++i) d.add(pt({0.5, 0.5}), 1.0);
  d.add(pt({0.1, 0.9}), 0.0);
  const Hyperparameters hp{0.3, 1.0, 0.0, 0.0};
  const PosteriorSnapshot post = build_posterior(d, hp);
  CHECK(post.jitter() >= 1e-10);
  CHECK(post.jitter() <= 1e-6);
  const MarginalPrediction mp = predict_marginal(post, std::vector<Point>{pt({0.5, 0.5})});
  CHECK(mp.mean[0] == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("predict_joint rejects dimension mismatch") {
  Dataset d;
  d.add(pt({0.5}), 1.0);
  const PosteriorSnapshot post = build_posterior(d, Hyperparameters{});
  CHECK_THROWS_AS(predict_joint(post, std::vector<Point>{pt({0.1, 0.2})}), UsageError);
  CHECK_THROWS_AS(predict_joint(post, std::vector<Point>{}), UsageError);
}

TEST_CASE("log_evidence closed forms") {
  const Evidence empty = log_evidence(Dataset{}, Hyperparameters{});
  CHECK(empty.value == 0.0);
  for (double g : empty.gradient) CHECK(g == 0.0);

  Dataset one;
  one.add(pt({0.3}), 0.4);
  const Evidence e = log_evidence(one, Hyperparameters{0.7, 0.75, 0.25, 0.4});
  // Exact up to the 1e-10 diagonal jitter.
  CHECK(e.value == doctest::Approx(-0.9189385332046727).epsilon(1e-9));
}

TEST_CASE("log_evidence matches the LU oracle and finite differences") {
  std::mt19937_64 rng(37);
  const double h = 1e-5;
  for (int t = 0; t < 20; ++t) {
    const RandomCase c = random_case(rng, 10, 1 + t % 2);
    const Evidence ev = log_evidence(c.data, c.hp);
    const double jitter = build_posterior(c.data, c.hp).jitter();
    const double ref = oracle::log_evidence(c.data.points, c.data.observations, to_oracle(c.hp), jitter);
    CHECK(ev.value == doctest::Approx(ref).epsilon(1e-10));
    for (int p = 0; p < 4; ++p) {
      auto at = [&](double delta) {
        oracle::Hp o = to_oracle(c.hp);
        if (p == 0) o.ell *= std::exp(delta);
        if (p == 1) o.sf2 *= std::exp(delta);
        if (p == 2) o.sn2 *= std::exp(delta);
        if (p == 3) o.mean += delta;
        return oracle::log_evidence(c.data.points, c.data.observations, o);
      };
      const double fd = (at(h) - at(-h)) / (2.0 * h);
      const double an = ev.gradient[static_cast<std::size_t>(p)];
      CHECK(std::abs(an - fd) / std::max({std::abs(fd), std::abs(an), 1e-4}) < 1e-4);
    }
  }
}

TEST_CASE("default hyperparameters before fitting") {
  const Box box{{0.0, 0.0}, {3.0, 4.0}};
  const Hyperparameters h0 = default_hyperparameters(Dataset{}, box);
  CHECK(h0.lengthscale == doctest::Approx(1.0));
  CHECK(h0.signal_variance == 1.0);
  CHECK(h0.noise_variance == 0.01);
  CHECK(h0.mean_const == 0.0);
  Dataset one;
  one.add(pt({1.0, 1.0}), -2.5);
  CHECK(default_hyperparameters(one, box).mean_const == -2.5);
}

TEST_CASE("bounds validation and clamping") {
  HyperparameterBounds b;
  CHECK_NOTHROW(b.validate());
  const Hyperparameters far{1e6, 1e-9, 1e6, 5e3};
  const Hyperparameters c = b.clamp(far);
  CHECK(b.contains(c));
  CHECK_FALSE(b.contains(far));
  b.lengthscale = {2.0, 1.0};
  CHECK_THROWS_AS(b.validate(), UsageError);
}

namespace {

// Draws y = f + noise with f from a zero-mean GP prior.
Dataset gp_data(std::uint64_t seed, int n, double ell, double noise_std) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<Point> x;
  for (int i = 0; i < n; ++i) x.push_back(pt({u(rng)}));
  oracle::Mat k = oracle::gram(x, x, {ell, 1.0, 0.0, 0.0});
  k.diagonal().array() += 1e-9;
  const oracle::Mat l = k.llt().matrixL();
  oracle::Vec w(n);
  for (int i = 0; i < n; ++i) w[i] = z(rng);
  const oracle::Vec f = l * w;
  Dataset d;
  for (int i = 0; i < n; ++i) d.add(x[static_cast<std::size_t>(i)], f[i] + noise_std * z(rng));
  return d;
}

}  // namespace

TEST_CASE("fit recovers the noise level of synthetic GP data") {
  const Box box{{0.0}, {3.0}};
  std::vector<double> ratios;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Dataset d = gp_data(100 + s, 60, 0.5, 0.1);
    Rng rng(s);
    const Hyperparameters hp = fit_hyperparameters(d, 5, default_bounds(d, box), rng);
    ratios.push_back(hp.noise_variance / 0.01);
  }
  std::sort(ratios.begin(), ratios.end());
  const double med = 0.5 * (ratios[4] + ratios[5]);
  CHECK(med > 0.5);
  CHECK(med < 2.0);
}

TEST_CASE("fit contract: bounds, improvement over starts, determinism") {
  const Box box{{0.0}, {3.0}};
  const Dataset d = gp_data(7, 25, 0.7, 0.2);
  const HyperparameterBounds bounds = default_bounds(d, box);
  std::vector<Hyperparameters> starts = {{0.1, 0.5, 0.1, 0.0}, {2.0, 2.0, 0.01, 0.3}, {0.6, 1.0, 0.05, -0.2}};
  for (Hyperparameters& s : starts) s = bounds.clamp(s);

  Rng a(42), b(42);
  const Hyperparameters h1 = fit_hyperparameters(d, 3, bounds, a, starts);
  const Hyperparameters h2 = fit_hyperparameters(d, 3, bounds, b, starts);
  CHECK(h1 == h2);
  CHECK(bounds.contains(h1));
  const double best = log_evidence(d, h1).value;
  for (const Hyperparameters& s : starts) CHECK(best >= log_evidence(d, s).value);

  Dataset one;
  one.add(pt({1.0}), 0.0);
  Rng r(1);
  CHECK_THROWS_AS(fit_hyperparameters(one, 3, bounds, r), UsageError);
  CHECK_THROWS_AS(fit_hyperparameters(d, 0, bounds, r), UsageError);
}

TEST_CASE("function samples") {
  Dataset d;
  d.add(pt({0.5}), 1.0);
  d.add(pt({-0.5}), -1.0);
  const Hyperparameters hp{0.4, 1.0, 0.0, 0.0};
  const PosteriorSnapshot post = build_posterior(d, hp);
  std::vector<Point> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(pt({-1.0 + 0.2 * i}));

  SUBCASE("zero-variance direction is exact") {
    Rng rng(1);
    const Eigen::MatrixXd s = sample_functions(post, grid, 500, rng);
    const Eigen::MatrixXd at = sample_functions(post, std::vector<Point>{pt({0.5}), pt({-0.5})}, 200, rng);
    CHECK((at.row(0).array() - 1.0).abs().maxCoeff() <= 1e-5);
    CHECK((at.row(1).array() + 1.0).abs().maxCoeff() <= 1e-5);
    CHECK(s.rows() == 11);
    CHECK(s.cols() == 500);
  }

  SUBCASE("sample mean agrees with the posterior mean") {
    Rng rng(2);
    const int m = 100000;
    const Eigen::MatrixXd s = sample_functions(post, grid, m, rng);
    const MarginalPrediction mp = predict_marginal(post, grid);
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      const double se = std::sqrt(mp.variance[i] / m);
      CHECK(std::abs(s.row(i).mean() - mp.mean[i]) <= 3.0 * se + 1e-12);
    }
  }

  SUBCASE("same seed, same samples") {
    Rng a(9), b(9);
    CHECK(sample_functions(post, grid, 50, a) == sample_functions(post, grid, 50, b));
  }
}
