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

#ifndef MME_GRID_HPP_
#define MME_GRID_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "mme/common.hpp"

namespace mme {

// Rectangular lattice over a box, row-major (last dimension fastest). Each
// axis holds |shape[i]| equally spaced points including both endpoints; a
// single-point axis sits at the interval midpoint.
class Grid {
 public:
  Grid(Box domain, std::vector<int> shape);

  const Box& domain() const { return domain_; }
  const std::vector<int>& shape() const { return shape_; }
  const std::vector<Point>& points() const { return points_; }
  const Point& point(std::size_t index) const { return points_.at(index); }
  std::size_t size() const { return points_.size(); }
  std::size_t dimension() const { return shape_.size(); }

  // Spacing per axis (0 for single-point axes).
  std::vector<double> steps() const;
  std::vector<int> unravel(std::size_t index) const;
  std::size_t ravel(const std::vector<int>& multi) const;
  // Indices at Chebyshev index-distance exactly 1.
  std::vector<std::size_t> neighbors(std::size_t index) const;
  // Max over axes of |index difference|.
  int index_distance(std::size_t a, std::size_t b) const;
  // Index of the grid point closest to x (per-axis rounding).
  std::size_t nearest_index(const Point& x) const;

 private:
  Box domain_;
  std::vector<int> shape_;
  std::vector<Point> points_;
};

// Parses "15x15" / "121" style shape strings.
std::vector<int> parse_grid_shape(const std::string& text);
std::string format_grid_shape(const std::vector<int>& shape);

}  // namespace mme

#endif  // MME_GRID_HPP_
