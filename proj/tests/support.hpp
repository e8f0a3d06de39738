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

// Test oracles shared by the unit suites and the acceptance binary.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "smdd_tr/domain.hpp"
#include "smdd_tr/inner.hpp"
#include "smdd_tr/llr.hpp"
#include "smdd_tr/problem.hpp"
#include "smdd_tr/rng.hpp"
#include "smdd_tr/tr.hpp"

namespace smdd::testing {

/// Central-difference gradient of f at x with per-coordinate step h * max(1, |x_i|).
inline Vector central_difference(const std::function<double(const Vector&)>& f, const Vector& x, double h = 1e-6) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x(i)));
    Vector plus = x;
    Vector minus = x;
    plus(i) += step;
    minus(i) -= step;
    g(i) = (f(plus) - f(minus)) / (2.0 * step);
  }
  return g;
}

/// |a - b| / max(|b|, 1): relative error with an absolute floor for tiny gradients.
inline double gradient_error(const Vector& analytic, const Vector& numeric) {
  return (analytic - numeric).norm() / std::max(numeric.norm(), 1.0);
}

/// Checks grad1, grad2 and grad3 of a spec at one point; returns the worst error.
inline double spec_gradient_error(const ProblemSpec& spec, const Vector& x, const Vector& y, const Vector& w,
                                  double h = 1e-6) {
  const Vector g1 = central_difference([&](const Vector& v) { return spec.loss(v, y, w); }, x, h);
  const Vector g2 = central_difference([&](const Vector& v) { return spec.loss(x, v, w); }, y, h);
  const Vector g3 = central_difference([&](const Vector& v) { return spec.loss(x, y, v); }, w, h);
  return std::max({gradient_error(spec.grad1(x, y, w), g1), gradient_error(spec.grad2(x, y, w), g2),
                   gradient_error(spec.grad3(x, y, w), g3)});
}

/// Finite-difference check of the surrogate x-gradient, chain term included.
inline double surrogate_gradient_error(const ProblemSpec& spec, const llr::LLRModel& model, const Vector& x,
                                       const Vector& y, double h = 1e-6) {
  const tr::SurrogateEval eval = tr::surrogate_value_and_xgrad(spec, model, x, y);
  const Vector numeric = central_difference(
      [&](const Vector& v) { return inner::scenario_average(spec, v, llr::surrogate_scenarios(model, v), y); }, x, h);
  return gradient_error(eval.xgrad, numeric);
}

/// Uniform point on the probability simplex (normalized exponentials).
inline Vector random_simplex_point(std::size_t m, Rng& rng) {
  Vector v(static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = -std::log(1.0 - rng.uniform());
  return v / v.sum();
}

/// Random SPD matrix with eigenvalues in [lo, hi] (both attained).
inline Matrix random_spd(std::size_t m, double lo, double hi, Rng& rng) {
  Matrix a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = rng.normal();
  }
  const Eigen::HouseholderQR<Matrix> qr(a);
  const Matrix q = qr.householderQ();
  Vector eig(a.rows());
  for (Eigen::Index i = 0; i < eig.size(); ++i) {
    eig(i) = a.rows() == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(a.rows() - 1);
  }
  return q * eig.asDiagonal() * q.transpose();
}

/// Strongly concave quadratic l(x, y, w) = -1/2 (y - w)^T H (y - w) with n = 1
/// and d = m, plus a planted constrained maximizer of the scenario average.
struct PlantedQuadratic {
  ProblemSpec spec;
  Matrix scenarios;
  Vector maximizer;
};

inline ProblemSpec quadratic_spec(const Matrix& h, const InnerDomain& domain) {
  ProblemSpec spec;
  spec.name = "quadratic";
  spec.n = 1;
  spec.m = static_cast<std::size_t>(h.rows());
  spec.d = spec.m;
  spec.loss = [h](const VectorRef&, const VectorRef& y, const VectorRef& w) {
    const Vector r = y - w;
    return -0.5 * r.dot(h * r);
  };
  spec.grad1 = [](const VectorRef&, const VectorRef&, const VectorRef&) { return Vector::Zero(1).eval(); };
  spec.grad2 = [h](const VectorRef&, const VectorRef& y, const VectorRef& w) { return Vector(-h * (y - w)); };
  spec.grad3 = [h](const VectorRef&, const VectorRef& y, const VectorRef& w) { return Vector(h * (y - w)); };
  spec.inner_domain = domain;
  const Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  spec.mu = es.eigenvalues().minCoeff();
  spec.inner_smoothness = es.eigenvalues().maxCoeff();
  return spec;
}

/// Builds an instance whose maximizer y* is known by construction: pick y* and
/// a gradient g satisfying the KKT conditions of the domain at y*, then set the
/// scenario mean c = y* + H^{-1} g so that grad g(y*) = -H (y* - c) = g.
inline PlantedQuadratic planted_quadratic(bool simplex, std::size_t m, Rng& rng) {
  const Matrix h = random_spd(m, 0.5 + rng.uniform(), 2.0 + 8.0 * rng.uniform(), rng);
  const auto mm = static_cast<Eigen::Index>(m);
  Vector y_star(mm);
  Vector grad(mm);
  InnerDomain domain = InnerDomain::simplex(m);
  if (simplex) {
    // Random support; zero coordinates get strictly smaller partials.
    Vector weights = random_simplex_point(m, rng);
    const double nu = rng.normal();
    for (Eigen::Index i = 0; i < mm; ++i) {
      const bool active = i == 0 || rng.uniform() < 0.5;
      if (!active) weights(i) = 0.0;
      grad(i) = active ? nu : nu - 0.1 - rng.uniform();
    }
    y_star = weights / weights.sum();
  } else {
    Vector lower(mm);
    Vector upper(mm);
    for (Eigen::Index i = 0; i < mm; ++i) {
      lower(i) = -1.0 - 2.0 * rng.uniform();
      upper(i) = 1.0 + 2.0 * rng.uniform();
      const double u = rng.uniform();
      if (u < 0.25) {
        y_star(i) = lower(i);
        grad(i) = -0.1 - rng.uniform();
      } else if (u < 0.5) {
        y_star(i) = upper(i);
        grad(i) = 0.1 + rng.uniform();
      } else {
        y_star(i) = lower(i) + (upper(i) - lower(i)) * (0.1 + 0.8 * rng.uniform());
        grad(i) = 0.0;
      }
    }
    domain = InnerDomain::box(lower, upper);
  }
  const Vector mean = y_star + h.ldlt().solve(grad);
  PlantedQuadratic out;
  out.spec = quadratic_spec(h, domain);
  out.maximizer = y_star;
  // Scenarios with exactly the planted mean.
  const Eigen::Index count = 5;
  out.scenarios.resize(mm, count);
  for (Eigen::Index j = 0; j < count; ++j) {
    for (Eigen::Index i = 0; i < mm; ++i) out.scenarios(i, j) = rng.normal();
  }
  const Vector shift = mean - out.scenarios.rowwise().mean();
  out.scenarios.colwise() += shift;
  return out;
}

/// Least-squares objective sum_i |w_i - B1^T x_i - b0|^2.
inline double ls_objective(const Matrix& points, const Matrix& responses, const Matrix& b1, const Vector& b0) {
  const Matrix fitted = (b1.transpose() * points).colwise() + b0;
  return (responses - fitted).squaredNorm();
}

/// Independent least-squares solve via the normal equations of [x^T, 1].
inline std::pair<Matrix, Vector> normal_equations_fit(const Matrix& points, const Matrix& responses) {
  const Eigen::Index n = points.rows();
  Matrix design(points.cols(), n + 1);
  design.leftCols(n) = points.transpose();
  design.col(n).setOnes();
  const Matrix coef = (design.transpose() * design).ldlt().solve(design.transpose() * responses.transpose());
  return {coef.topRows(n), coef.row(n).transpose()};
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("smdd_tr_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace smdd::testing
