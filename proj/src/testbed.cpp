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

#include "mme/testbed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mme/errors.hpp"

namespace mme {

namespace {

double toy1d(const Point& x) {
  const double v = x[0];
  return (1.0 - std::exp(-v * v)) * std::cos(3.0 * kPi * v);
}

double hosaki(const Point& x) {
  const double a = x[0];
  const double b = x[1];
  const double poly = 1.0 - 8.0 * a + 7.0 * a * a - (7.0 / 3.0) * a * a * a + 0.25 * a * a * a * a;
  return poly * b * b * std::exp(-b);
}

double camel6(const Point& x) {
  const double a = x[0];
  const double b = x[1];
  const double a2 = a * a;
  const double b2 = b * b;
  return (4.0 - 2.1 * a2 + a2 * a2 / 3.0) * a2 + a * b + (-4.0 + 4.0 * b2) * b2;
}

const std::vector<Objective>& registry() {
  static const std::vector<Objective> objectives = {
      {"toy1d", 1, Box{{-1.5}, {1.5}}, &toy1d},
      {"hosaki", 2, Box{{0.0, 0.0}, {5.0, 6.0}}, &hosaki},
      {"camel6", 2, Box{{-2.0, -1.0}, {2.0, 1.0}}, &camel6},
  };
  return objectives;
}

constexpr std::size_t kFineLatticePoints = 100000;

// Compass search inside the box; the step halves whenever no axis move helps.
Point refine(const Objective& obj, Point x, double initial_step) {
  double fx = obj.function(x);
  double step = initial_step;
  const Box& box = obj.domain;
  while (step > 1e-13) {
    bool improved = false;
    for (Eigen::Index a = 0; a < x.size(); ++a) {
      for (double sign : {-1.0, 1.0}) {
        Point y = x;
        const auto ai = static_cast<std::size_t>(a);
        y[a] = std::clamp(y[a] + sign * step, box.lower[ai], box.upper[ai]);
        const double fy = obj.function(y);
        if (fy < fx) {
          x = y;
          fx = fy;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return x;
}

bool near_value(double v, double target) { return v <= target + 1e-9 + 1e-6 * std::abs(target); }

}  // namespace

const Objective& objective_by_name(std::string_view name) {
  for (const Objective& o : registry())
    if (o.name == name) return o;
  throw UsageError("unknown objective '" + std::string(name) + "' (expected toy1d|hosaki|camel6)");
}

std::vector<std::string> objective_names() {
  std::vector<std::string> names;
  for (const Objective& o : registry()) names.push_back(o.name);
  return names;
}

double evaluate_objective(const Objective& obj, const Point& x) {
  if (x.size() != obj.dimension)
    throw UsageError(obj.name + " expects a " + std::to_string(obj.dimension) + "-dimensional point");
  if (!obj.domain.contains(x)) throw UsageError("point lies outside the " + obj.name + " domain");
  return obj.function(x);
}

double noisy_query(const NoisyOracle& oracle, const Point& x, Rng& rng) {
  if (oracle.objective == nullptr) throw UsageError("noisy oracle has no objective");
  if (!(oracle.noise_std >= 0.0)) throw UsageError("noise_std must be non-negative");
  const double f = evaluate_objective(*oracle.objective, x);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double z = normal(rng);
  return f + oracle.noise_std * z;
}

std::vector<int> default_grid_shape(const Objective& obj) {
  return obj.dimension == 1 ? std::vector<int>{121} : std::vector<int>(static_cast<std::size_t>(obj.dimension), 15);
}

GroundTruth ground_truth(const Objective& obj, const Grid& grid) {
  if (grid.dimension() != static_cast<std::size_t>(obj.dimension))
    throw UsageError("grid dimension does not match objective " + obj.name);

  const int per_axis = static_cast<int>(std::ceil(
      std::pow(static_cast<double>(kFineLatticePoints), 1.0 / obj.dimension) - 1e-9)) + 1;
  const Grid fine(obj.domain, std::vector<int>(static_cast<std::size_t>(obj.dimension), per_axis | 1));
  std::vector<double> values(fine.size());
  for (std::size_t i = 0; i < fine.size(); ++i) values[i] = obj.function(fine.point(i));

  // Strict lattice minima plus the lattice argmin (plateaus would otherwise
  // hide a flat global minimum).
  std::vector<std::size_t> seeds;
  for (std::size_t i = 0; i < fine.size(); ++i) {
    bool strict = true;
    for (std::size_t j : fine.neighbors(i)) {
      if (values[j] <= values[i]) {
        strict = false;
        break;
      }
    }
    if (strict) seeds.push_back(i);
  }
  const std::size_t lattice_best = argmin_index(values);
  if (std::find(seeds.begin(), seeds.end(), lattice_best) == seeds.end()) seeds.push_back(lattice_best);

  const std::vector<double> steps = fine.steps();
  const double step = *std::max_element(steps.begin(), steps.end());
  std::vector<Point> minima;
  std::vector<double> minima_values;
  for (std::size_t s : seeds) {
    const Point x = refine(obj, fine.point(s), step);
    const double fx = obj.function(x);
    bool duplicate = false;
    for (std::size_t k = 0; k < minima.size(); ++k) {
      if ((minima[k] - x).norm() < 1e-6 * obj.domain.diagonal()) {
        duplicate = true;
        if (fx < minima_values[k]) {
          minima[k] = x;
          minima_values[k] = fx;
        }
        break;
      }
    }
    if (!duplicate) {
      minima.push_back(x);
      minima_values.push_back(fx);
    }
  }

  GroundTruth gt;
  gt.global_minimum = *std::min_element(minima_values.begin(), minima_values.end());
  for (std::size_t k = 0; k < minima.size(); ++k) {
    if (near_value(minima_values[k], gt.global_minimum)) {
      gt.global_minimizers.push_back(minima[k]);
    } else {
      gt.local_minimizers.push_back(minima[k]);
      gt.local_minima.push_back(minima_values[k]);
    }
  }

  std::vector<double> grid_values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) grid_values[i] = evaluate_objective(obj, grid.point(i));
  gt.grid_minimum = *std::min_element(grid_values.begin(), grid_values.end());
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (near_value(grid_values[i], gt.grid_minimum)) gt.grid_minimizers.push_back(i);

  gt.reference_distribution.probabilities.assign(grid.size(), 0.0);
  for (std::size_t i : gt.grid_minimizers)
    gt.reference_distribution.probabilities[i] = 1.0 / static_cast<double>(gt.grid_minimizers.size());
  return gt;
}

}  // namespace mme
