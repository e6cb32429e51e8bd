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

#include "mme/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "mme/errors.hpp"

namespace mme {

Grid::Grid(Box domain, std::vector<int> shape) : domain_(std::move(domain)), shape_(std::move(shape)) {
  if (shape_.empty() || shape_.size() != domain_.dimension())
    throw UsageError("grid shape has " + std::to_string(shape_.size()) +
                     " axes but the domain has " + std::to_string(domain_.dimension()));
  std::size_t total = 1;
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (shape_[i] < 1) throw UsageError("grid shape entries must be positive");
    if (!(domain_.lower[i] <= domain_.upper[i])) throw UsageError("grid domain has an empty axis");
    total *= static_cast<std::size_t>(shape_[i]);
  }
  const auto d = static_cast<Eigen::Index>(shape_.size());
  points_.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    const std::vector<int> multi = unravel(idx);
    Point p(d);
    for (std::size_t a = 0; a < shape_.size(); ++a) {
      // Centre-relative form keeps grids over symmetric boxes exactly symmetric.
      const double centre = 0.5 * (domain_.lower[a] + domain_.upper[a]);
      const double half = 0.5 * (domain_.upper[a] - domain_.lower[a]);
      double v = centre;
      if (shape_[a] > 1) {
        v = centre + half * static_cast<double>(2 * multi[a] - (shape_[a] - 1)) / (shape_[a] - 1);
        if (multi[a] == 0) v = domain_.lower[a];
        if (multi[a] == shape_[a] - 1) v = domain_.upper[a];
      }
      p[static_cast<Eigen::Index>(a)] = v;
    }
    points_.push_back(std::move(p));
  }
}

std::vector<double> Grid::steps() const {
  std::vector<double> s(shape_.size(), 0.0);
  for (std::size_t a = 0; a < shape_.size(); ++a)
    if (shape_[a] > 1) s[a] = (domain_.upper[a] - domain_.lower[a]) / (shape_[a] - 1);
  return s;
}

std::vector<int> Grid::unravel(std::size_t index) const {
  std::vector<int> multi(shape_.size());
  for (std::size_t a = shape_.size(); a-- > 0;) {
    multi[a] = static_cast<int>(index % static_cast<std::size_t>(shape_[a]));
    index /= static_cast<std::size_t>(shape_[a]);
  }
  return multi;
}

std::size_t Grid::ravel(const std::vector<int>& multi) const {
  std::size_t idx = 0;
  for (std::size_t a = 0; a < shape_.size(); ++a)
    idx = idx * static_cast<std::size_t>(shape_[a]) + static_cast<std::size_t>(multi[a]);
  return idx;
}

std::vector<std::size_t> Grid::neighbors(std::size_t index) const {
  const std::vector<int> centre = unravel(index);
  std::vector<std::size_t> out;
  std::vector<int> offset(shape_.size(), -1);
  while (true) {
    bool zero = true;
    bool inside = true;
    std::vector<int> m = centre;
    for (std::size_t a = 0; a < shape_.size(); ++a) {
      m[a] += offset[a];
      zero = zero && offset[a] == 0;
      inside = inside && m[a] >= 0 && m[a] < shape_[a];
    }
    if (!zero && inside) out.push_back(ravel(m));
    std::size_t a = shape_.size();
    while (a-- > 0) {
      if (++offset[a] <= 1) break;
      offset[a] = -1;
    }
    if (a == static_cast<std::size_t>(-1)) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

int Grid::index_distance(std::size_t a, std::size_t b) const {
  const std::vector<int> ma = unravel(a);
  const std::vector<int> mb = unravel(b);
  int d = 0;
  for (std::size_t i = 0; i < ma.size(); ++i) d = std::max(d, std::abs(ma[i] - mb[i]));
  return d;
}

std::size_t Grid::nearest_index(const Point& x) const {
  if (static_cast<std::size_t>(x.size()) != shape_.size())
    throw UsageError("point dimension does not match grid");
  const std::vector<double> step = steps();
  std::vector<int> multi(shape_.size(), 0);
  for (std::size_t a = 0; a < shape_.size(); ++a) {
    if (shape_[a] == 1) continue;
    const double k = std::round((x[static_cast<Eigen::Index>(a)] - domain_.lower[a]) / step[a]);
    multi[a] = static_cast<int>(std::clamp(k, 0.0, static_cast<double>(shape_[a] - 1)));
  }
  return ravel(multi);
}

std::vector<int> parse_grid_shape(const std::string& text) {
  std::vector<int> shape;
  if (text.empty() || text.back() == 'x') throw UsageError("invalid grid shape '" + text + "'");
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    char* end = nullptr;
    const long v = std::strtol(part.c_str(), &end, 10);
    if (part.empty() || end == nullptr || *end != '\0' || v < 1 || v > 100000)
      throw UsageError("invalid grid shape '" + text + "'");
    shape.push_back(static_cast<int>(v));
  }
  if (shape.empty()) throw UsageError("invalid grid shape '" + text + "'");
  return shape;
}

std::string format_grid_shape(const std::vector<int>& shape) {
  std::string s;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += 'x';
    s += std::to_string(shape[i]);
  }
  return s;
}

}  // namespace mme
