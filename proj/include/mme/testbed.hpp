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

// Benchmark objectives, the noisy observation oracle and brute-force
// ground truth.
//
//   toy1d  : (1 - exp(-x^2)) cos(3 pi x)                          on [-1.5, 1.5]
//   hosaki : (1 - 8a + 7a^2 - 7/3 a^3 + 1/4 a^4) b^2 exp(-b)      on [0, 5] x [0, 6]
//   camel6 : (4 - 2.1a^2 + a^4/3) a^2 + ab + (-4 + 4b^2) b^2      on [-2, 2] x [-1, 1]

#ifndef MME_TESTBED_HPP_
#define MME_TESTBED_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "mme/common.hpp"
#include "mme/grid.hpp"
#include "mme/minimizer_posterior.hpp"

namespace mme {

struct Objective {
  std::string name;
  int dimension = 0;
  Box domain;
  double (*function)(const Point&) = nullptr;
};

// Throws UsageError for names other than toy1d, hosaki, camel6.
const Objective& objective_by_name(std::string_view name);
std::vector<std::string> objective_names();

// Throws UsageError for an out-of-domain or wrong-dimension x.
double evaluate_objective(const Objective& obj, const Point& x);

struct NoisyOracle {
  const Objective* objective = nullptr;
  double noise_std = 0.0;
};

// evaluate(x) + noise_std * N(0, 1), with a fresh draw on every query.
double noisy_query(const NoisyOracle& oracle, const Point& x, Rng& rng);

struct GroundTruth {
  std::vector<Point> global_minimizers;
  double global_minimum = 0.0;
  // Non-global interior local minimizers found by the same sweep.
  std::vector<Point> local_minimizers;
  std::vector<double> local_minima;
  std::vector<std::size_t> grid_minimizers;
  double grid_minimum = 0.0;
  MinimizerDistribution reference_distribution;
};

// Brute force over a fine lattice (>= 1e5 points) followed by pattern-search
// refinement of every lattice local minimum. Deterministic.
GroundTruth ground_truth(const Objective& obj, const Grid& grid);

// Default candidate grid: 121 points in 1D, 15x15 in 2D.
std::vector<int> default_grid_shape(const Objective& obj);

}  // namespace mme

#endif  // MME_TESTBED_HPP_
