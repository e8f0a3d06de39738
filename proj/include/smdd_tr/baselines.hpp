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

// Simplified reference baselines for comparison runs.
//
// SPD: stochastic primal-dual. Plain simultaneous gradient descent/ascent on
//   the sampled loss; the gradient ignores that D depends on x.
// ASGDA: alternating stochastic gradient descent/ascent with a global affine
//   location model w ~ A^T x + c learned online by exponentially weighted
//   least squares. The x-gradient adds the chain term A * grad3 l.
//
// Both are minimal versions of the published methods, not faithful ports.

#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "smdd_tr/domain.hpp"
#include "smdd_tr/problem.hpp"
#include "smdd_tr/rng.hpp"
#include "smdd_tr/types.hpp"

namespace smdd::baselines {

enum class Method { kAsgda, kSpdConstant, kSpdDynamic };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::kAsgda: return "asgda";
    case Method::kSpdConstant: return "spd-constant";
    case Method::kSpdDynamic: return "spd-dynamic";
  }
  return "unknown";
}

struct BaselineConfig {
  Method method = Method::kSpdConstant;
  double eta_x = 1e-3;  // ASGDA
  double eta_y = 1e-1;  // ASGDA
  double eta = 1e-3;    // SPD constant
  /// SPD dynamic stepsize 1 / (a + b t).
  double dynamic_a = 1000.0;
  double dynamic_b = 10.0;
  std::size_t batch = 500;
  std::size_t max_iters = 5000;
  std::uint64_t seed = 0;
  /// ASGDA forgetting factor for the location model.
  double forgetting = 0.99;
  /// Ridge added to the weighted Gram matrix of the location model.
  double ridge = 1e-10;
  double divergence_threshold = 1e8;

  void validate() const {
    if (!(eta_x > 0.0 && eta_y > 0.0 && eta > 0.0)) throw ConfigError("baseline: stepsizes must be positive");
    if (!(dynamic_a > 0.0) || !(dynamic_b >= 0.0)) throw ConfigError("baseline: dynamic schedule needs a > 0, b >= 0");
    if (batch == 0) throw ConfigError("baseline: batch must be >= 1");
    if (!(forgetting > 0.0 && forgetting <= 1.0)) throw ConfigError("baseline: forgetting must lie in (0, 1]");
    if (!(ridge >= 0.0)) throw ConfigError("baseline: ridge must be nonnegative");
    if (!(divergence_threshold > 0.0)) throw ConfigError("baseline: divergence_threshold must be positive");
  }

  double spd_stepsize(std::size_t t) const {
    if (method == Method::kSpdDynamic) return 1.0 / (dynamic_a + dynamic_b * static_cast<double>(t));
    return eta;
  }
};

struct BaselineState {
  Vector x;
  Vector y;
  std::size_t t = 0;
  bool diverged = false;
  double last_grad_norm = 0.0;
  double last_stepsize = 0.0;
  // ASGDA location model: coef = [A; c^T], (n + 1) x d, fitted from the
  // weighted sufficient statistics gram = sum phi phi^T and cross = sum phi w^T.
  Matrix coef;
  Matrix gram;
  Matrix cross;

  Matrix location_slope() const { return coef.topRows(coef.rows() - 1); }
  Vector location_intercept() const { return coef.row(coef.rows() - 1).transpose(); }
};

inline BaselineState initial_state(const VectorRef& x0, const VectorRef& y0, const ProblemSpec& problem) {
  detail::require_dim(x0.size(), problem.n, "baseline x0");
  detail::require_dim(y0.size(), problem.m, "baseline y0");
  BaselineState state;
  state.x = x0;
  state.y = project(problem.inner_domain, y0);
  const auto n1 = static_cast<Eigen::Index>(problem.n + 1);
  const auto d = static_cast<Eigen::Index>(problem.d);
  state.coef = Matrix::Zero(n1, d);
  state.gram = Matrix::Zero(n1, n1);
  state.cross = Matrix::Zero(n1, d);
  return state;
}

/// True when |(x, y)| exceeds the threshold or any coordinate is non-finite.
inline bool is_divergent(const VectorRef& x, const VectorRef& y, double threshold) {
  if (!x.allFinite() || !y.allFinite()) return true;
  return std::sqrt(x.squaredNorm() + y.squaredNorm()) > threshold;
}

inline BaselineState spd_step(BaselineState state, const ProblemSpec& problem, const DistributionOracle& oracle,
                              const BaselineConfig& config, Rng& rng) {
  const Matrix draws = oracle.sample(state.x, config.batch, rng);
  Vector gx = Vector::Zero(static_cast<Eigen::Index>(problem.n));
  Vector gy = Vector::Zero(static_cast<Eigen::Index>(problem.m));
  for (Eigen::Index j = 0; j < draws.cols(); ++j) {
    gx += problem.grad1(state.x, state.y, draws.col(j));
    gy += problem.grad2(state.x, state.y, draws.col(j));
  }
  gx /= static_cast<double>(draws.cols());
  gy /= static_cast<double>(draws.cols());

  const double eta = config.spd_stepsize(state.t);
  state.x -= eta * gx;
  state.y = project(problem.inner_domain, state.y + eta * gy);
  state.last_grad_norm = gx.norm();
  state.last_stepsize = eta;
  ++state.t;
  state.diverged = is_divergent(state.x, state.y, config.divergence_threshold);
  return state;
}

inline BaselineState asgda_step(BaselineState state, const ProblemSpec& problem, const DistributionOracle& oracle,
                                const BaselineConfig& config, Rng& rng) {
  const Vector x_sampled = state.x;
  const Matrix draws = oracle.sample(x_sampled, config.batch, rng);
  const double count = static_cast<double>(draws.cols());
  const Matrix slope = state.location_slope();

  Vector gx = Vector::Zero(static_cast<Eigen::Index>(problem.n));
  for (Eigen::Index j = 0; j < draws.cols(); ++j) {
    gx += problem.grad1(state.x, state.y, draws.col(j)) + slope * problem.grad3(state.x, state.y, draws.col(j));
  }
  gx /= count;
  state.x -= config.eta_x * gx;

  Vector gy = Vector::Zero(static_cast<Eigen::Index>(problem.m));
  for (Eigen::Index j = 0; j < draws.cols(); ++j) gy += problem.grad2(state.x, state.y, draws.col(j));
  gy /= count;
  state.y = project(problem.inner_domain, state.y + config.eta_y * gy);

  // Location model update with the new batch.
  const auto n1 = state.gram.rows();
  Vector phi(n1);
  phi.head(n1 - 1) = x_sampled;
  phi(n1 - 1) = 1.0;
  state.gram = config.forgetting * state.gram + count * phi * phi.transpose();
  state.cross = config.forgetting * state.cross + phi * draws.rowwise().sum().transpose();
  const Matrix regularized = state.gram + config.ridge * Matrix::Identity(n1, n1);
  state.coef = regularized.ldlt().solve(state.cross);

  state.last_grad_norm = gx.norm();
  state.last_stepsize = config.eta_x;
  ++state.t;
  state.diverged = is_divergent(state.x, state.y, config.divergence_threshold) || !state.coef.allFinite();
  return state;
}

struct BaselineRecord {
  std::size_t k = 0;
  Vector x_before;
  Vector x_after;
  double stepsize = 0.0;
  double grad_norm = 0.0;
  double y_norm = 0.0;
  bool diverged = false;
  double true_phi = std::nan("");
  double true_grad_norm = std::nan("");
};

struct BaselineResult {
  BaselineState state;
  std::vector<BaselineRecord> history;
  /// Iteration at which divergence was detected, or max_iters when it never was.
  std::size_t diverged_at = 0;
};

using DiagnosticsFn = std::function<PrimalDiagnostics(const VectorRef& x, Rng& rng)>;

/// Runs the configured method until max_iters or divergence.
inline BaselineResult run_baseline(const VectorRef& x0, const VectorRef& y0, const ProblemSpec& problem,
                                   const DistributionOracle& oracle, const BaselineConfig& config,
                                   const DiagnosticsFn& diagnostics = {}) {
  config.validate();
  problem.validate();
  BaselineResult result;
  result.state = initial_state(x0, y0, problem);
  result.diverged_at = config.max_iters;
  const Rng root(config.seed);
  const Rng diag_root = root.split(0x5eed'd1a6'0000'0002ULL);
  for (std::size_t k = 0; k < config.max_iters; ++k) {
    BaselineRecord rec;
    rec.k = k;
    rec.x_before = result.state.x;
    Rng rng = root.split(k);
    result.state = config.method == Method::kAsgda ? asgda_step(std::move(result.state), problem, oracle, config, rng)
                                                   : spd_step(std::move(result.state), problem, oracle, config, rng);
    rec.x_after = result.state.x;
    rec.stepsize = result.state.last_stepsize;
    rec.grad_norm = result.state.last_grad_norm;
    rec.y_norm = result.state.y.norm();
    rec.diverged = result.state.diverged;
    if (diagnostics && !rec.diverged) {
      Rng drng = diag_root.split(k);
      const PrimalDiagnostics diag = diagnostics(rec.x_after, drng);
      rec.true_phi = diag.phi;
      rec.true_grad_norm = diag.grad_norm;
    }
    result.history.push_back(std::move(rec));
    if (result.state.diverged) {
      result.diverged_at = k;
      break;
    }
  }
  return result;
}

}  // namespace smdd::baselines
