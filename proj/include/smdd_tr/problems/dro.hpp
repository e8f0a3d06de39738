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

// Distributionally robust logistic regression with decision-dependent features.
//
//   min_x max_{y in simplex(N)} (1/N) sum_i y_i log(1 + exp(-b_i a_i(x)^T x)) + f(x) - g(y)
//   f(x) = lambda1 sum_j alpha x_j^2 / (1 + alpha x_j^2)
//   g(y) = lambda2 / 2 |N y - 1|^2
//   a_i(x) = a0_i + V sin(x),  V = diag(shift_scale)
//
// The random vector w stacks the N shifted feature rows: w[i * n + j] = a_i(x)_j.

#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "smdd_tr/inner.hpp"
#include "smdd_tr/problem.hpp"

namespace smdd::problems {

struct CreditData {
  Matrix features;  // N x n base features a0_i
  Vector labels;    // N, entries in {-1, +1}

  std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(features.cols()); }
};

struct DROProblem {
  CreditData data;
  double shift_scale = 5.0;
  double lambda1 = 1.0;
  /// NaN selects the default 10 / N^2.
  double lambda2 = std::numeric_limits<double>::quiet_NaN();
  double alpha = 1.0;
  /// Std-dev of optional Gaussian noise on every stacked feature (0 = deterministic map).
  double feature_noise = 0.0;

  std::size_t n() const { return data.cols(); }
  std::size_t N() const { return data.rows(); }
  double effective_lambda2() const {
    if (!std::isnan(lambda2)) return lambda2;
    const double rows = static_cast<double>(N());
    return 10.0 / (rows * rows);
  }
  /// Strong-concavity modulus of the inner problem, lambda2 * N^2.
  double mu() const {
    const double rows = static_cast<double>(N());
    return effective_lambda2() * rows * rows;
  }
};

namespace detail {

inline double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// View of the stacked feature vector as an N x n row-major matrix.
using FeatureMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

inline FeatureMap features_of(const VectorRef& w, std::size_t rows, std::size_t cols) {
  return FeatureMap(w.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

inline double nonconvex_regularizer(const VectorRef& x, double lambda1, double alpha) {
  const Eigen::ArrayXd ax2 = alpha * x.array().square();
  return lambda1 * (ax2 / (1.0 + ax2)).sum();
}

inline Vector nonconvex_regularizer_grad(const VectorRef& x, double lambda1, double alpha) {
  const Eigen::ArrayXd denom = 1.0 + alpha * x.array().square();
  return (lambda1 * 2.0 * alpha * x.array() / denom.square()).matrix();
}

}  // namespace detail

/// Stacked features psi(x) = a0_i + V sin(x) for every row.
inline Vector dro_feature_map(const DROProblem& problem, const VectorRef& x) {
  const auto rows = static_cast<Eigen::Index>(problem.N());
  const auto cols = static_cast<Eigen::Index>(problem.n());
  const Eigen::RowVectorXd shift = (problem.shift_scale * x.array().sin()).matrix().transpose();
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> shifted =
      problem.data.features.rowwise() + shift;
  return Eigen::Map<const Vector>(shifted.data(), rows * cols);
}

inline ProblemSpec dro_spec(const DROProblem& problem) {
  const std::size_t rows = problem.N();
  const std::size_t cols = problem.n();
  if (rows == 0 || cols == 0) throw ConfigError("dro: empty data set");
  const double inv_rows = 1.0 / static_cast<double>(rows);
  const double lambda1 = problem.lambda1;
  const double lambda2 = problem.effective_lambda2();
  const double alpha = problem.alpha;
  const Vector labels = problem.data.labels;

  ProblemSpec spec;
  spec.name = "dro";
  spec.n = cols;
  spec.m = rows;
  spec.d = rows * cols;
  spec.loss = [=](const VectorRef& x, const VectorRef& y, const VectorRef& w) {
    const auto a = detail::features_of(w, rows, cols);
    const Eigen::ArrayXd margins = labels.array() * (a * x).array();
    double weighted = 0.0;
    for (Eigen::Index i = 0; i < margins.size(); ++i) weighted += y(i) * detail::softplus(-margins(i));
    const double gap = (static_cast<double>(rows) * y.array() - 1.0).matrix().squaredNorm();
    return inv_rows * weighted + detail::nonconvex_regularizer(x, lambda1, alpha) - 0.5 * lambda2 * gap;
  };
  spec.grad1 = [=](const VectorRef& x, const VectorRef& y, const VectorRef& w) {
    const auto a = detail::features_of(w, rows, cols);
    const Eigen::ArrayXd margins = labels.array() * (a * x).array();
    Vector coeff(margins.size());
    for (Eigen::Index i = 0; i < margins.size(); ++i) {
      coeff(i) = -inv_rows * y(i) * labels(i) * detail::sigmoid(-margins(i));
    }
    return Vector(a.transpose() * coeff + detail::nonconvex_regularizer_grad(x, lambda1, alpha));
  };
  spec.grad2 = [=](const VectorRef& x, const VectorRef& y, const VectorRef& w) {
    const auto a = detail::features_of(w, rows, cols);
    const Eigen::ArrayXd margins = labels.array() * (a * x).array();
    Vector g(margins.size());
    const double n_rows = static_cast<double>(rows);
    for (Eigen::Index i = 0; i < margins.size(); ++i) {
      g(i) = inv_rows * detail::softplus(-margins(i)) - lambda2 * n_rows * (n_rows * y(i) - 1.0);
    }
    return g;
  };
  spec.grad3 = [=](const VectorRef& x, const VectorRef& y, const VectorRef& w) {
    const auto a = detail::features_of(w, rows, cols);
    const Eigen::ArrayXd margins = labels.array() * (a * x).array();
    Vector g(static_cast<Eigen::Index>(rows * cols));
    for (Eigen::Index i = 0; i < margins.size(); ++i) {
      const double c = -inv_rows * y(i) * labels(i) * detail::sigmoid(-margins(i));
      g.segment(i * static_cast<Eigen::Index>(cols), static_cast<Eigen::Index>(cols)) = c * x;
    }
    return g;
  };
  spec.inner_domain = InnerDomain::simplex(rows);
  spec.mu = problem.mu();
  // The y-Hessian is exactly -lambda2 N^2 I.
  spec.inner_smoothness = spec.mu;
  return spec;
}

inline DistributionOracle dro_oracle(const DROProblem& problem) {
  DistributionOracle oracle;
  oracle.d = problem.N() * problem.n();
  oracle.sampler = [problem](const VectorRef& x, std::size_t count, Rng& rng) {
    const Vector mean = dro_feature_map(problem, x);
    Matrix draws = mean.replicate(1, static_cast<Eigen::Index>(count));
    if (problem.feature_noise > 0.0) {
      for (Eigen::Index j = 0; j < draws.cols(); ++j) {
        for (Eigen::Index i = 0; i < draws.rows(); ++i) draws(i, j) += problem.feature_noise * rng.normal();
      }
    }
    return draws;
  };
  return oracle;
}

/// Objective value computed straight from the definition, restricted to the
/// listed rows (all rows when `rows` is empty). The 1/N factor always uses the
/// full data-set size.
inline double dro_inner_exact_check(const DROProblem& problem, const VectorRef& x, const VectorRef& y,
                                    std::span<const std::size_t> rows = {}) {
  const std::size_t total = problem.N();
  smdd::detail::require_dim(x.size(), problem.n(), "dro x");
  smdd::detail::require_dim(y.size(), total, "dro y");
  std::vector<std::size_t> all;
  if (rows.empty()) {
    all.resize(total);
    for (std::size_t i = 0; i < total; ++i) all[i] = i;
    rows = all;
  }
  double loss_sum = 0.0;
  for (const std::size_t i : rows) {
    if (i >= total) throw ContractViolation("dro_inner_exact_check: row index " + std::to_string(i) + " out of range");
    double margin = 0.0;
    for (std::size_t j = 0; j < problem.n(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double feature = problem.data.features(static_cast<Eigen::Index>(i), jj) +
                             problem.shift_scale * std::sin(x(jj));
      margin += feature * x(jj);
    }
    loss_sum += y(static_cast<Eigen::Index>(i)) * std::log(1.0 + std::exp(-problem.data.labels(static_cast<Eigen::Index>(i)) * margin));
  }
  double f = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) f += problem.lambda1 * problem.alpha * x(j) * x(j) / (1.0 + problem.alpha * x(j) * x(j));
  double g = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double r = static_cast<double>(total) * y(i) - 1.0;
    g += r * r;
  }
  g *= 0.5 * problem.effective_lambda2();
  return loss_sum / static_cast<double>(total) + f - g;
}

/// Monte-Carlo primal value and gradient: the inner problem is solved on
/// `samples` fresh draws and the gradient follows Danskin's rule with the
/// exact Jacobian of the feature shift (d a_ij / d x_j = shift_scale cos x_j).
inline PrimalDiagnostics dro_primal_estimate(const DROProblem& problem, const ProblemSpec& spec,
                                             const DistributionOracle& oracle, const VectorRef& x,
                                             std::size_t samples, Rng& rng) {
  const Matrix draws = oracle.sample(x, samples, rng);
  const auto report = inner::maximize_over_scenarios(spec, x, draws, spec.inner_domain.center(), 1e-10);
  const Vector& y = report.maximizer;
  const auto cols = static_cast<Eigen::Index>(problem.n());
  const Vector jac_diag = problem.shift_scale * x.array().cos().matrix();

  PrimalDiagnostics out;
  out.samples = samples;
  out.grad = Vector::Zero(cols);
  double value = 0.0;
  for (Eigen::Index s = 0; s < draws.cols(); ++s) {
    value += spec.loss(x, y, draws.col(s));
    out.grad += spec.grad1(x, y, draws.col(s));
    const Vector g3 = spec.grad3(x, y, draws.col(s));
    const auto per_row = detail::features_of(g3, problem.N(), problem.n());
    out.grad += jac_diag.cwiseProduct(per_row.colwise().sum().transpose());
  }
  out.phi = value / static_cast<double>(samples);
  out.grad /= static_cast<double>(samples);
  out.grad_norm = out.grad.norm();
  return out;
}

inline Benchmark dro_benchmark(const DROProblem& problem, std::size_t diagnostic_samples = 5000) {
  Benchmark bench{dro_spec(problem), dro_oracle(problem), {}};
  bench.diagnostics = [problem, spec = bench.problem, oracle = bench.oracle, diagnostic_samples](
                          const VectorRef& x, Rng& rng) {
    return dro_primal_estimate(problem, spec, oracle, x, diagnostic_samples, rng);
  };
  return bench;
}

}  // namespace smdd::problems
