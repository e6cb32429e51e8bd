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

#ifndef MME_COMMON_HPP_
#define MME_COMMON_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace mme {

using Point = Eigen::VectorXd;

// All randomness flows through explicitly passed generators of this type.
using Rng = std::mt19937_64;

inline constexpr double kPi = 3.14159265358979323846;

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// splitmix64 finalizer; used to derive independent stream seeds from
// (run seed, iteration, candidate) tuples without any shared state.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) {
  return mix64(mix64(mix64(a) ^ b) ^ c);
}

// Axis-aligned closed box [lower_i, upper_i].
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dimension() const { return lower.size(); }

  bool contains(const Point& x, double tol = 1e-12) const {
    if (static_cast<std::size_t>(x.size()) != lower.size()) return false;
    for (std::size_t i = 0; i < lower.size(); ++i) {
      if (!(x[static_cast<Eigen::Index>(i)] >= lower[i] - tol) ||
          !(x[static_cast<Eigen::Index>(i)] <= upper[i] + tol))
        return false;
    }
    return true;
  }

  double diagonal() const {
    double s = 0.0;
    for (std::size_t i = 0; i < lower.size(); ++i) s += (upper[i] - lower[i]) * (upper[i] - lower[i]);
    return std::sqrt(s);
  }
};

}  // namespace mme

#endif  // MME_COMMON_HPP_
