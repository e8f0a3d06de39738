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

// Scalar nonconvex / strongly concave benchmark:
//
//   min_x max_{|y| <= 125}  E[ x^2 - 2 (x + y) w - y^2 ],   w = x^3 + eps,  eps ~ N(0, sigma^2)
//
// The primal function has stationary points at x in {0, 1, -1}.

#pragma once

#include <algorithm>
#include <cmath>

#include "smdd_tr/problem.hpp"

namespace smdd::problems {

struct SyntheticProblem {
  double noise_sigma = 1.0;
  double box_half_width = 125.0;
};

/// Closed-form primal function max_y {x^2 - 2 (x + y) x^3 - y^2} for the default box.
inline double synthetic_primal(double x) {
  const double x2 = x * x;
  const double x4 = x2 * x2;
  if (x > 5.0) return x2 - 2.0 * x4 + 250.0 * x2 * x - 15625.0;
  if (x < -5.0) return x2 - 2.0 * x4 - 250.0 * x2 * x - 15625.0;
  return x2 - 2.0 * x4 + x4 * x2;
}

inline double synthetic_primal_grad(double x) {
  const double x2 = x * x;
  if (x > 5.0) return 2.0 * x - 8.0 * x2 * x + 750.0 * x2;
  if (x < -5.0) return 2.0 * x - 8.0 * x2 * x - 750.0 * x2;
  return 2.0 * x - 8.0 * x2 * x + 6.0 * x2 * x2 * x;
}

/// Primal value and derivative for an arbitrary box half-width h:
/// y* = clamp(-x^3, -h, h).
inline double synthetic_primal(double x, double half_width) {
  const double mean = x * x * x;
  const double y = std::clamp(-mean, -half_width, half_width);
  return x * x - 2.0 * (x + y) * mean - y * y;
}

inline double synthetic_primal_grad(double x, double half_width) {
  const double mean = x * x * x;
  const double y = std::clamp(-mean, -half_width, half_width);
  // Danskin: d/dx of x^2 - 2 (x + y) x^3 - y^2 at fixed y.
  return 2.0 * x - 2.0 * mean - 6.0 * (x + y) * x * x;
}

inline ProblemSpec synthetic_spec(const SyntheticProblem& config = {}) {
  ProblemSpec spec;
  spec.name = "synthetic";
  spec.n = 1;
  spec.m = 1;
  spec.d = 1;
  spec.loss = [](const VectorRef& x, const VectorRef& y, const VectorRef& w) {
    return x(0) * x(0) - 2.0 * (x(0) + y(0)) * w(0) - y(0) * y(0);
  };
  spec.grad1 = [](const VectorRef& x, const VectorRef&, const VectorRef& w) {
    return Vector::Constant(1, 2.0 * x(0) - 2.0 * w(0));
  };
  spec.grad2 = [](const VectorRef&, const VectorRef& y, const VectorRef& w) {
    return Vector::Constant(1, -2.0 * w(0) - 2.0 * y(0));
  };
  spec.grad3 = [](const VectorRef& x, const VectorRef& y, const VectorRef&) {
    return Vector::Constant(1, -2.0 * (x(0) + y(0)));
  };
  spec.inner_domain = InnerDomain::symmetric_box(1, config.box_half_width);
  spec.mu = 2.0;
  spec.inner_smoothness = 2.0;
  return spec;
}

inline DistributionOracle synthetic_oracle(const SyntheticProblem& config = {}) {
  DistributionOracle oracle;
  oracle.d = 1;
  const double sigma = config.noise_sigma;
  oracle.sampler = [sigma](const VectorRef& x, std::size_t count, Rng& rng) {
    const double mean = x(0) * x(0) * x(0);
    Matrix draws(1, static_cast<Eigen::Index>(count));
    for (Eigen::Index j = 0; j < draws.cols(); ++j) draws(0, j) = mean + sigma * rng.normal();
    return draws;
  };
  return oracle;
}

inline Benchmark synthetic_benchmark(const SyntheticProblem& config = {}) {
  Benchmark bench{synthetic_spec(config), synthetic_oracle(config), {}};
  const double h = config.box_half_width;
  bench.diagnostics = [h](const VectorRef& x, Rng&) {
    PrimalDiagnostics out;
    out.phi = synthetic_primal(x(0), h);
    const double g = synthetic_primal_grad(x(0), h);
    out.grad = Vector::Constant(1, g);
    out.grad_norm = std::abs(g);
    return out;
  };
  return bench;
}

}  // namespace smdd::problems
