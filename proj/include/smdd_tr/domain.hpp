// Copyright 2026 The smdd-tr Authors
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

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <variant>
#include <vector>

#include "smdd_tr/types.hpp"

namespace smdd {

struct Box {
  Vector lower;
  Vector upper;
};

/// Probability simplex {y >= 0, sum(y) = 1} in R^dimension.
struct Simplex {
  std::size_t dimension = 0;
};

/// Convex, bounded feasible set of the inner (maximization) variable.
class InnerDomain {
 public:
  static InnerDomain box(Vector lower, Vector upper) {
    if (lower.size() != upper.size() || lower.size() == 0) {
      throw ConfigError("box bounds must be nonempty and have equal dimension");
    }
    if (!(lower.array() < upper.array()).all()) {
      throw ConfigError("box requires lower < upper componentwise");
    }
    return InnerDomain(Box{std::move(lower), std::move(upper)});
  }

  /// Symmetric box [-half_width, half_width]^dimension.
  static InnerDomain symmetric_box(std::size_t dimension, double half_width) {
    return box(Vector::Constant(static_cast<Eigen::Index>(dimension), -half_width),
               Vector::Constant(static_cast<Eigen::Index>(dimension), half_width));
  }

  static InnerDomain simplex(std::size_t dimension) {
    if (dimension == 0) throw ConfigError("simplex dimension must be positive");
    return InnerDomain(Simplex{dimension});
  }

  std::size_t dimension() const {
    if (const auto* b = std::get_if<Box>(&geometry_)) return static_cast<std::size_t>(b->lower.size());
    return std::get<Simplex>(geometry_).dimension;
  }

  /// Euclidean diameter: |upper - lower| for a box, sqrt(2) for a simplex.
  double diameter() const {
    if (const auto* b = std::get_if<Box>(&geometry_)) return (b->upper - b->lower).norm();
    return std::numbers::sqrt2;
  }

  bool is_box() const { return std::holds_alternative<Box>(geometry_); }
  bool is_simplex() const { return std::holds_alternative<Simplex>(geometry_); }
  const Box& as_box() const { return std::get<Box>(geometry_); }

  /// Box midpoint or the uniform simplex vector.
  Vector center() const {
    if (const auto* b = std::get_if<Box>(&geometry_)) return 0.5 * (b->lower + b->upper);
    const auto m = static_cast<Eigen::Index>(dimension());
    return Vector::Constant(m, 1.0 / static_cast<double>(m));
  }

  bool contains(const VectorRef& y, double tol = 1e-12) const {
    if (y.size() != static_cast<Eigen::Index>(dimension())) return false;
    if (const auto* b = std::get_if<Box>(&geometry_)) {
      return (y.array() >= b->lower.array() - tol).all() && (y.array() <= b->upper.array() + tol).all();
    }
    return (y.array() >= -tol).all() && std::abs(y.sum() - 1.0) <= tol * std::max<double>(1.0, y.size());
  }

 private:
  explicit InnerDomain(std::variant<Box, Simplex> g) : geometry_(std::move(g)) {}

  std::variant<Box, Simplex> geometry_;
};

namespace detail {

// Sort-based exact projection onto {p >= 0, sum p = 1}.
inline Vector project_simplex(const VectorRef& y) {
  const Eigen::Index m = y.size();
  std::vector<double> sorted(y.data(), y.data() + m);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    cumulative += sorted[static_cast<std::size_t>(j)];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (sorted[static_cast<std::size_t>(j)] - candidate > 0.0) theta = candidate;
  }
  return (y.array() - theta).max(0.0).matrix();
}

}  // namespace detail

/// Euclidean projection of `y` onto `domain`.
inline Vector project(const InnerDomain& domain, const VectorRef& y) {
  detail::require_dim(y.size(), domain.dimension(), "project");
  if (domain.is_box()) {
    const Box& b = domain.as_box();
    return y.cwiseMax(b.lower).cwiseMin(b.upper);
  }
  return detail::project_simplex(y);
}

}  // namespace smdd
