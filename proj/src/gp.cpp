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

#include "mme/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace mme {

namespace {

constexpr double kInitialJitter = 1e-10;
constexpr double kMaxJitter = 1e-6;

void check_dimension(const Point& a, const Point& b) {
  if (a.size() != b.size()) {
    std::ostringstream os;
    os << "dimension mismatch: " << a.size() << " vs " << b.size();
    throw UsageError(os.str());
  }
}

struct Factorization {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
};

// Factorizes base + (noise + jitter) I, escalating jitter on failure.
Factorization factorize(const Eigen::MatrixXd& base, double noise, const Hyperparameters& hp) {
  const Eigen::Index n = base.rows();
  Factorization out;
  for (double rel = kInitialJitter; rel <= kMaxJitter * (1.0 + 1e-9); rel *= 10.0) {
    const double jitter = rel * hp.signal_variance;
    Eigen::MatrixXd a = base;
    a.diagonal().array() += noise + jitter;
    out.llt.compute(a);
    if (out.llt.info() == Eigen::Success && (out.llt.matrixLLT().diagonal().array() > 0.0).all()) {
      out.jitter = jitter;
      return out;
    }
  }
  std::ostringstream os;
  os << "kernel matrix factorization failed (n=" << n << ", " << hp.to_string()
     << ") after jitter escalation to " << kMaxJitter << " x signal_variance";
  throw NumericalError(os.str());
}

double sq_dist(const Point& a, const Point& b) { return (a - b).squaredNorm(); }

}  // namespace

void Hyperparameters::validate() const {
  if (!std::isfinite(lengthscale) || !std::isfinite(signal_variance) ||
      !std::isfinite(noise_variance) || !std::isfinite(mean_const))
    throw UsageError("hyperparameters must be finite: " + to_string());
  if (!(lengthscale > 0.0)) throw UsageError("lengthscale must be positive: " + to_string());
  if (!(signal_variance > 0.0)) throw UsageError("signal_variance must be positive: " + to_string());
  if (!(noise_variance >= 0.0)) throw UsageError("noise_variance must be non-negative: " + to_string());
}

std::string Hyperparameters::to_string() const {
  std::ostringstream os;
  os.precision(6);
  os << "lengthscale=" << lengthscale << " signal_variance=" << signal_variance
     << " noise_variance=" << noise_variance << " mean_const=" << mean_const;
  return os.str();
}

void Dataset::validate(const Box* domain) const {
  if (points.size() != observations.size())
    throw UsageError("dataset has " + std::to_string(points.size()) + " points but " +
                     std::to_string(observations.size()) + " observations");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != points.front().size())
      throw UsageError("dataset point " + std::to_string(i) + " has inconsistent dimension");
    if (!points[i].allFinite() || !std::isfinite(observations[i]))
      throw UsageError("dataset entry " + std::to_string(i) + " is not finite");
    if (domain != nullptr && !domain->contains(points[i]))
      throw UsageError("dataset point " + std::to_string(i) + " lies outside the domain");
  }
}

Eigen::VectorXd Dataset::observation_vector() const {
  return Eigen::Map<const Eigen::VectorXd>(observations.data(),
                                           static_cast<Eigen::Index>(observations.size()));
}

double kernel_eval(const Point& a, const Point& b, const Hyperparameters& hp) {
  check_dimension(a, b);
  const double l2 = hp.lengthscale * hp.lengthscale;
  return hp.signal_variance * std::exp(-sq_dist(a, b) / (2.0 * l2));
}

Eigen::MatrixXd kernel_matrix(std::span<const Point> a, std::span<const Point> b,
                              const Hyperparameters& hp) {
  Eigen::MatrixXd k(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t j = 0; j < b.size(); ++j)
    for (std::size_t i = 0; i < a.size(); ++i)
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kernel_eval(a[i], b[j], hp);
  return k;
}

PosteriorSnapshot build_posterior(Dataset data, const Hyperparameters& hp) {
  hp.validate();
  data.validate();
  PosteriorSnapshot post;
  post.hp_ = hp;
  const auto n = static_cast<Eigen::Index>(data.size());
  if (n == 0) {
    post.data_ = std::move(data);
    post.chol_.resize(0, 0);
    post.weights_.resize(0);
    post.jitter_ = kInitialJitter * hp.signal_variance;
    return post;
  }
  const Eigen::MatrixXd k = kernel_matrix(data.points, data.points, hp);
  Factorization f = factorize(k, hp.noise_variance, hp);
  post.chol_ = f.llt.matrixL();
  post.jitter_ = f.jitter;
  Eigen::VectorXd r = data.observation_vector().array() - hp.mean_const;
  post.weights_ = f.llt.solve(r);
  post.data_ = std::move(data);
  return post;
}

namespace {

void check_query(const PosteriorSnapshot& post, std::span<const Point> query) {
  if (query.empty()) throw UsageError("query set is empty");
  const int d = post.dataset().dimension();
  for (std::size_t i = 0; i < query.size(); ++i) {
    if (query[i].size() != query.front().size() || (d >= 0 && query[i].size() != d))
      throw UsageError("query point " + std::to_string(i) + " has mismatched dimension");
  }
}

}  // namespace

JointPrediction predict_joint(const PosteriorSnapshot& post, std::span<const Point> query) {
  check_query(post, query);
  const Hyperparameters& hp = post.hyperparameters();
  JointPrediction out;
  out.covariance = kernel_matrix(query, query, hp);
  out.mean = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(query.size()), hp.mean_const);
  if (post.size() > 0) {
    const Eigen::MatrixXd kxq = kernel_matrix(post.dataset().points, query, hp);
    out.mean.noalias() += kxq.transpose() * post.weights();
    const Eigen::MatrixXd v = post.chol_factor().triangularView<Eigen::Lower>().solve(kxq);
    out.covariance.noalias() -= v.transpose() * v;
  }
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  for (Eigen::Index i = 0; i < out.covariance.rows(); ++i)
    out.covariance(i, i) = std::max(out.covariance(i, i), 0.0);
  return out;
}

MarginalPrediction predict_marginal(const PosteriorSnapshot& post, std::span<const Point> query) {
  check_query(post, query);
  const Hyperparameters& hp = post.hyperparameters();
  const auto m = static_cast<Eigen::Index>(query.size());
  MarginalPrediction out;
  out.mean = Eigen::VectorXd::Constant(m, hp.mean_const);
  out.variance = Eigen::VectorXd::Constant(m, hp.signal_variance);
  if (post.size() > 0) {
    const Eigen::MatrixXd kxq = kernel_matrix(post.dataset().points, query, hp);
    out.mean.noalias() += kxq.transpose() * post.weights();
    const Eigen::MatrixXd v = post.chol_factor().triangularView<Eigen::Lower>().solve(kxq);
    out.variance -= v.colwise().squaredNorm().transpose();
  }
  out.variance = out.variance.cwiseMax(0.0);
  return out;
}

Evidence log_evidence(const Dataset& data, const Hyperparameters& hp) {
  hp.validate();
  data.validate();
  Evidence ev;
  const auto n = static_cast<Eigen::Index>(data.size());
  if (n == 0) return ev;

  const Eigen::MatrixXd k = kernel_matrix(data.points, data.points, hp);
  Factorization f = factorize(k, hp.noise_variance, hp);
  const Eigen::VectorXd r = data.observation_vector().array() - hp.mean_const;
  const Eigen::VectorXd alpha = f.llt.solve(r);
  const Eigen::MatrixXd l = f.llt.matrixL();

  ev.value = -0.5 * r.dot(alpha) - l.diagonal().array().log().sum() -
             0.5 * static_cast<double>(n) * std::log(2.0 * kPi);

  // d/dtheta = 0.5 tr((alpha alpha^T - K^{-1}) dK/dtheta)
  const Eigen::MatrixXd kinv = f.llt.solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd w = alpha * alpha.transpose() - kinv;
  const double l2 = hp.lengthscale * hp.lengthscale;
  double g_len = 0.0;
  double g_sig = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d2 = sq_dist(data.points[static_cast<std::size_t>(i)],
                                data.points[static_cast<std::size_t>(j)]);
      g_len += w(i, j) * k(i, j) * d2 / l2;
      g_sig += w(i, j) * k(i, j);
    }
  }
  ev.gradient[0] = 0.5 * g_len;
  ev.gradient[1] = 0.5 * g_sig;
  ev.gradient[2] = 0.5 * hp.noise_variance * w.trace();
  ev.gradient[3] = alpha.sum();
  return ev;
}

void HyperparameterBounds::validate() const {
  auto check = [](const std::array<double, 2>& b, bool positive, const char* name) {
    if (!std::isfinite(b[0]) || !std::isfinite(b[1]) || !(b[0] <= b[1]) || (positive && !(b[0] > 0.0)))
      throw UsageError(std::string("invalid hyperparameter bounds for ") + name);
  };
  check(lengthscale, true, "lengthscale");
  check(signal_variance, true, "signal_variance");
  check(noise_variance, true, "noise_variance");
  check(mean_const, false, "mean_const");
}

bool HyperparameterBounds::contains(const Hyperparameters& hp, double rel_tol) const {
  auto in = [rel_tol](double v, const std::array<double, 2>& b) {
    const double slack = rel_tol * std::max({std::abs(b[0]), std::abs(b[1]), 1.0});
    return v >= b[0] - slack && v <= b[1] + slack;
  };
  return in(hp.lengthscale, lengthscale) && in(hp.signal_variance, signal_variance) &&
         in(hp.noise_variance, noise_variance) && in(hp.mean_const, mean_const);
}

Hyperparameters HyperparameterBounds::clamp(const Hyperparameters& hp) const {
  return {std::clamp(hp.lengthscale, lengthscale[0], lengthscale[1]),
          std::clamp(hp.signal_variance, signal_variance[0], signal_variance[1]),
          std::clamp(hp.noise_variance, noise_variance[0], noise_variance[1]),
          std::clamp(hp.mean_const, mean_const[0], mean_const[1])};
}

namespace {

double observation_variance(const Dataset& data) {
  const std::size_t n = data.size();
  if (n < 2) return 1.0;
  double mean = 0.0;
  for (double y : data.observations) mean += y;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double y : data.observations) var += (y - mean) * (y - mean);
  return var / static_cast<double>(n - 1);
}

}  // namespace

HyperparameterBounds default_bounds(const Dataset& data, const Box& domain) {
  const double diag = domain.diagonal() > 0.0 ? domain.diagonal() : 1.0;
  const double v = std::max(observation_variance(data), 1e-4);
  const double sd = std::sqrt(v);
  HyperparameterBounds b;
  b.lengthscale = {1e-3 * diag, 1e3 * diag};
  b.signal_variance = {1e-3 * v, 1e3 * v};
  b.noise_variance = {1e-6 * v, 1e3 * v};
  if (data.empty()) {
    b.mean_const = {-10.0 * sd, 10.0 * sd};
  } else {
    const auto [lo, hi] = std::minmax_element(data.observations.begin(), data.observations.end());
    b.mean_const = {*lo - 10.0 * sd, *hi + 10.0 * sd};
  }
  return b;
}

Hyperparameters default_hyperparameters(const Dataset& data, const Box& domain) {
  Hyperparameters hp;
  hp.lengthscale = 0.2 * (domain.diagonal() > 0.0 ? domain.diagonal() : 1.0);
  hp.signal_variance = 1.0;
  hp.noise_variance = 0.01;
  hp.mean_const = 0.0;
  if (!data.empty()) {
    double s = 0.0;
    for (double y : data.observations) s += y;
    hp.mean_const = s / static_cast<double>(data.size());
  }
  return hp;
}

namespace {

using Vec4 = Eigen::Vector4d;

Vec4 to_search(const Hyperparameters& hp) {
  return {std::log(hp.lengthscale), std::log(hp.signal_variance), std::log(hp.noise_variance),
          hp.mean_const};
}

Hyperparameters from_search(const Vec4& u) {
  return {std::exp(u[0]), std::exp(u[1]), std::exp(u[2]), u[3]};
}

struct SearchBox {
  Vec4 lo, hi;

  explicit SearchBox(const HyperparameterBounds& b)
      : lo(std::log(b.lengthscale[0]), std::log(b.signal_variance[0]), std::log(b.noise_variance[0]),
           b.mean_const[0]),
        hi(std::log(b.lengthscale[1]), std::log(b.signal_variance[1]), std::log(b.noise_variance[1]),
           b.mean_const[1]) {}

  Vec4 project(const Vec4& u) const { return u.cwiseMax(lo).cwiseMin(hi); }
};

// Negated evidence so the inner loop minimizes.
struct Objective {
  const Dataset& data;
  bool operator()(const Vec4& u, double& value, Vec4& grad) const {
    try {
      const Evidence ev = log_evidence(data, from_search(u));
      if (!std::isfinite(ev.value)) return false;
      value = -ev.value;
      for (int i = 0; i < 4; ++i) grad[i] = -ev.gradient[static_cast<std::size_t>(i)];
      return grad.allFinite();
    } catch (const NumericalError&) {
      return false;
    }
  }
};

struct LocalResult {
  bool ok = false;
  Vec4 u;
  double value = std::numeric_limits<double>::infinity();
};

LocalResult ascend(const Objective& obj, const SearchBox& box, Vec4 u, const FitOptions& opt) {
  LocalResult res;
  u = box.project(u);
  double f = 0.0;
  Vec4 g;
  if (!obj(u, f, g)) return res;
  res = {true, u, f};

  Eigen::Matrix4d h = Eigen::Matrix4d::Identity() / std::max(1.0, g.norm());
  for (int it = 0; it < opt.max_iterations; ++it) {
    // Freeze coordinates sitting on a bound whose gradient points outward.
    Eigen::Vector4d free = Eigen::Vector4d::Ones();
    for (int i = 0; i < 4; ++i) {
      if ((u[i] <= box.lo[i] && g[i] > 0.0) || (u[i] >= box.hi[i] && g[i] < 0.0)) free[i] = 0.0;
    }
    const Vec4 pg = g.cwiseProduct(free);
    if (pg.norm() < 1e-10) break;

    Vec4 d = -(h * pg).cwiseProduct(free);
    if (d.dot(pg) >= 0.0) {
      h = Eigen::Matrix4d::Identity() / std::max(1.0, pg.norm());
      d = -h * pg;
    }

    double t = 1.0;
    bool accepted = false;
    Vec4 u_new, g_new;
    double f_new = 0.0;
    for (int ls = 0; ls < 50; ++ls, t *= 0.5) {
      u_new = box.project(u + t * d);
      if ((u_new - u).norm() < 1e-14) break;
      if (obj(u_new, f_new, g_new) && f_new <= f + 1e-4 * g.dot(u_new - u)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;

    const Vec4 s = u_new - u;
    const Vec4 y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (it == 0) h = Eigen::Matrix4d::Identity() * (sy / y.squaredNorm());
      const double rho = 1.0 / sy;
      const Eigen::Matrix4d v = Eigen::Matrix4d::Identity() - rho * s * y.transpose();
      h = v * h * v.transpose() + rho * s * s.transpose();
    }
    const double change = f - f_new;
    u = u_new;
    f = f_new;
    g = g_new;
    res = {true, u, f};
    if (change < opt.tolerance * (1.0 + std::abs(f))) break;
  }
  return res;
}

}  // namespace

Hyperparameters fit_hyperparameters(const Dataset& data, int restarts,
                                    const HyperparameterBounds& bounds, Rng& rng,
                                    std::span<const Hyperparameters> warm_starts,
                                    const FitOptions& options) {
  if (data.size() < 2)
    throw UsageError("hyperparameter fitting needs at least 2 observations, got " +
                     std::to_string(data.size()));
  if (restarts < 1) throw UsageError("restarts must be >= 1");
  data.validate();
  bounds.validate();

  const SearchBox box(bounds);
  const Objective obj{data};

  // Random starts are drawn from the central 40% of each search interval; the
  // ascent itself is free to reach the full box.
  std::vector<Vec4> starts;
  for (const Hyperparameters& w : warm_starts) starts.push_back(box.project(to_search(bounds.clamp(w))));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int r = 0; r < restarts; ++r) {
    Vec4 u;
    for (int i = 0; i < 4; ++i) {
      const double span = box.hi[i] - box.lo[i];
      u[i] = box.lo[i] + span * (0.3 + 0.4 * unit(rng));
    }
    starts.push_back(u);
  }

  LocalResult best;
  for (const Vec4& u0 : starts) {
    const LocalResult r = ascend(obj, box, u0, options);
    if (r.ok && r.value < best.value) best = r;
  }
  if (!best.ok) {
    throw FitError("hyperparameter fitting failed for all " + std::to_string(starts.size()) +
                       " initializations (n=" + std::to_string(data.size()) + ")",
                   false, Hyperparameters{});
  }
  return bounds.clamp(from_search(best.u));
}

FunctionSampler::FunctionSampler(const JointPrediction& joint, double variance_floor) : mean_(joint.mean) {
  const Eigen::Index m = joint.covariance.rows();
  if (m == 0) throw UsageError("cannot sample on an empty grid");
  Eigen::MatrixXd cov = joint.covariance;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (cov(i, i) > variance_floor) continue;
    cov.row(i).setZero();
    cov.col(i).setZero();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success)
    throw NumericalError("posterior covariance eigendecomposition failed (grid size " +
                         std::to_string(m) + ")");
  const Eigen::VectorXd scale = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  transform_ = es.eigenvectors() * scale.asDiagonal();
}

Eigen::MatrixXd FunctionSampler::draw(Rng& rng, int count) const {
  if (count < 1) throw UsageError("sample count must be >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Index m = mean_.size();
  Eigen::MatrixXd z(m, count);
  for (Eigen::Index j = 0; j < count; ++j)
    for (Eigen::Index i = 0; i < m; ++i) z(i, j) = normal(rng);
  Eigen::MatrixXd out = transform_ * z;
  out.colwise() += mean_;
  return out;
}

double sampling_variance_floor(const PosteriorSnapshot& post) {
  return post.jitter() + 1e-12 * post.hyperparameters().signal_variance;
}

Eigen::MatrixXd sample_functions(const PosteriorSnapshot& post, std::span<const Point> grid,
                                 int count, Rng& rng) {
  if (count < 1) throw UsageError("sample count must be >= 1");
  return FunctionSampler(predict_joint(post, grid), sampling_variance_floor(post)).draw(rng, count);
}

}  // namespace mme
