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

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "smdd_tr/domain.hpp"
#include "smdd_tr/rng.hpp"
#include "smdd_tr/types.hpp"

namespace smdd {

/// A smooth loss l(x, y, w) with hand-coded partial gradients.
///
/// x is the outer (minimized) variable of size n, y the inner (maximized)
/// variable of size m and w the random vector of size d. The loss must be
/// mu-strongly concave in y over `inner_domain` for every (x, w);
/// `inner_smoothness` bounds the Lipschitz constant of grad2 in y and sets
/// the fixed stepsize of the inner solver.
struct ProblemSpec {
  using ScalarFn = std::function<double(const VectorRef& x, const VectorRef& y, const VectorRef& w)>;
  using VectorFn = std::function<Vector(const VectorRef& x, const VectorRef& y, const VectorRef& w)>;

  std::string name;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t d = 0;
  ScalarFn loss;
  VectorFn grad1;  // d/dx, w held fixed
  VectorFn grad2;  // d/dy
  VectorFn grad3;  // d/dw
  InnerDomain inner_domain = InnerDomain::symmetric_box(1, 1.0);
  double mu = 0.0;
  double inner_smoothness = 0.0;

  void validate() const {
    if (n == 0 || m == 0 || d == 0) throw ConfigError("problem '" + name + "': dimensions must be positive");
    if (!loss || !grad1 || !grad2 || !grad3) throw ConfigError("problem '" + name + "': missing evaluator");
    if (inner_domain.dimension() != m) throw ConfigError("problem '" + name + "': inner domain dimension != m");
    if (!(mu > 0.0)) throw ConfigError("problem '" + name + "': mu must be positive");
    if (!(inner_smoothness >= mu)) throw ConfigError("problem '" + name + "': inner_smoothness must be >= mu");
  }
};

/// Black-box sampler of w ~ D(x).
///
/// `sample(x, count, rng)` returns a d x count matrix whose columns are i.i.d.
/// draws. Identical (x, count, rng state) must give bit-identical output.
struct DistributionOracle {
  using Sampler = std::function<Matrix(const VectorRef& x, std::size_t count, Rng& rng)>;

  std::size_t d = 0;
  Sampler sampler;

  Matrix sample(const VectorRef& x, std::size_t count, Rng& rng) const {
    if (count == 0) throw ConfigError("oracle: sample count must be >= 1");
    Matrix draws = sampler(x, count, rng);
    detail::require_dim(draws.rows(), d, "oracle draw");
    detail::require_dim(draws.cols(), count, "oracle draw count");
    return draws;
  }
};

/// Ground-truth quantities of the primal function Phi(x) = max_y E l(x, y, w).
struct PrimalDiagnostics {
  double phi = std::nan("");
  double grad_norm = std::nan("");
  Vector grad;
  /// Monte-Carlo sample count behind the values, 0 when closed-form.
  std::size_t samples = 0;
};

/// Problem + oracle, plus optional verification machinery used for logging.
struct Benchmark {
  ProblemSpec problem;
  DistributionOracle oracle;
  /// Ground truth at x; may consume randomness from the supplied stream.
  std::function<PrimalDiagnostics(const VectorRef& x, Rng& rng)> diagnostics;
};

/// `count` points uniform in the closed ball B(center, radius), one per column.
///
/// Direction is a normalized Gaussian vector, radius scaled by U^(1/n).
inline Matrix uniform_ball_sample(const VectorRef& center, double radius, std::size_t count, Rng& rng) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigError("uniform_ball_sample: radius must be positive");
  if (count == 0) throw ConfigError("uniform_ball_sample: count must be >= 1");
  const Eigen::Index n = center.size();
  if (n == 0) throw ContractViolation("uniform_ball_sample: empty center");
  Matrix points(n, static_cast<Eigen::Index>(count));
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    Vector dir(n);
    double norm = 0.0;
    do {
      for (Eigen::Index j = 0; j < n; ++j) dir(j) = rng.normal();
      norm = dir.norm();
    } while (norm == 0.0);
    const double r = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(n));
    points.col(i) = center + (r / norm) * dir;
  }
  return points;
}

}  // namespace smdd
