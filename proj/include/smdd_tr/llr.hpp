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

// Local linear regression of the distribution map inside a trust region.
//
// Points x^i = center + radius * u^i with u^i in the unit ball are paired with
// fresh draws w^i ~ D(x^i) and the affine model w ~ B1^T x + B0 is fitted by
// least squares. The residuals e^i = w^i - B1^T x^i - B0 define the empirical
// noise of the surrogate distribution: scenario i at x is B1^T x + B0 + e^i.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "smdd_tr/problem.hpp"
#include "smdd_tr/rng.hpp"
#include "smdd_tr/types.hpp"

namespace smdd::llr {

class PoisednessError : public Error {
 public:
  PoisednessError(const std::string& what, double best_metric) : Error(what), best_metric_(best_metric) {}
  double best_metric() const { return best_metric_; }

 private:
  double best_metric_;
};

class SingularFitError : public Error {
 public:
  using Error::Error;
};

/// Regression design [u^i, 1] with u^i = (x^i - center) / radius (one row per sample).
inline Matrix scaled_design(const Matrix& unit_points) {
  const Eigen::Index n = unit_points.rows();
  Matrix design(unit_points.cols(), n + 1);
  design.leftCols(n) = unit_points.transpose();
  design.col(n).setOnes();
  return design;
}

/// 2-norm condition number of the scaled design; +inf when rank deficient.
inline double design_condition(const Matrix& unit_points) {
  const Matrix design = scaled_design(unit_points);
  if (design.rows() < design.cols()) return std::numeric_limits<double>::infinity();
  Eigen::JacobiSVD<Matrix> svd(design);
  const auto& s = svd.singularValues();
  const double smallest = s(s.size() - 1);
  if (!(smallest > 0.0)) return std::numeric_limits<double>::infinity();
  return s(0) / smallest;
}

/// Sample set T_k = {(x^i, w^i)} used to fit the local model.
struct PoisedSampleSet {
  Vector center;
  double radius = 0.0;
  Matrix unit_points;  // n x N, (x^i - center) / radius
  Matrix points;       // n x N
  Matrix responses;    // d x N
  double poisedness_metric = std::numeric_limits<double>::infinity();

  std::size_t size() const { return static_cast<std::size_t>(points.cols()); }

  /// Builds a set from raw points; the unit coordinates are recomputed.
  static PoisedSampleSet from_points(Vector center, double radius, Matrix points, Matrix responses) {
    if (!(radius > 0.0)) throw ConfigError("sample set radius must be positive");
    detail::require_dim(points.rows(), static_cast<std::size_t>(center.size()), "sample points");
    detail::require_dim(responses.cols(), static_cast<std::size_t>(points.cols()), "sample responses");
    PoisedSampleSet set;
    set.unit_points = (points.colwise() - center) / radius;
    set.center = std::move(center);
    set.radius = radius;
    set.points = std::move(points);
    set.responses = std::move(responses);
    set.poisedness_metric = design_condition(set.unit_points);
    return set;
  }
};

struct PoisednessOptions {
  double lambda_max = 100.0;
  int max_rounds = 50;
};

/// Draws `count` points uniformly in B(center, radius) whose scaled design has
/// condition number <= lambda_max, then queries one oracle draw per point.
///
/// Geometry repair redraws the highest-leverage point, at most `max_rounds`
/// times. Point i's response uses stream `rng.split(i)` of a child stream, so
/// results do not depend on query order. `rng` itself is not advanced.
inline PoisedSampleSet generate_poised_set(const DistributionOracle& oracle, const VectorRef& center, double radius,
                                           std::size_t count, const Rng& rng,
                                           const PoisednessOptions& options = {}) {
  const auto n = static_cast<std::size_t>(center.size());
  if (count < n + 1) {
    throw ConfigError("generate_poised_set: need at least n + 1 = " + std::to_string(n + 1) + " points, got " +
                      std::to_string(count));
  }
  if (!(radius > 0.0)) throw ConfigError("generate_poised_set: radius must be positive");
  if (!(options.lambda_max > 1.0)) throw ConfigError("generate_poised_set: lambda_max must exceed 1");

  Rng geometry_rng = rng.split(0);
  const Rng response_rng = rng.split(1);

  const Vector origin = Vector::Zero(center.size());
  Matrix unit = uniform_ball_sample(origin, 1.0, count, geometry_rng);
  double metric = design_condition(unit);
  double best = metric;
  for (int round = 0; round < options.max_rounds && !(metric <= options.lambda_max); ++round) {
    const Matrix design = scaled_design(unit);
    Eigen::Index worst = 0;
    if (std::isfinite(metric)) {
      Eigen::HouseholderQR<Matrix> qr(design);
      const Matrix q = qr.householderQ() * Matrix::Identity(design.rows(), design.cols());
      q.rowwise().squaredNorm().maxCoeff(&worst);
    } else {
      worst = static_cast<Eigen::Index>(geometry_rng() % count);
    }
    unit.col(worst) = uniform_ball_sample(origin, 1.0, 1, geometry_rng).col(0);
    metric = design_condition(unit);
    best = std::min(best, metric);
  }
  if (!(metric <= options.lambda_max)) {
    throw PoisednessError("generate_poised_set: condition number " + std::to_string(best) + " exceeds lambda_max " +
                              std::to_string(options.lambda_max),
                          best);
  }

  PoisedSampleSet set;
  set.center = center;
  set.radius = radius;
  set.points = (radius * unit).colwise() + center;
  set.unit_points = std::move(unit);
  set.poisedness_metric = metric;
  set.responses.resize(static_cast<Eigen::Index>(oracle.d), static_cast<Eigen::Index>(count));
  for (Eigen::Index i = 0; i < set.points.cols(); ++i) {
    Rng point_rng = response_rng.split(static_cast<std::uint64_t>(i));
    set.responses.col(i) = oracle.sample(set.points.col(i), 1, point_rng).col(0);
  }
  return set;
}

/// Fitted affine model w = B1^T x + B0 plus its residual cloud.
///
/// Predictions are evaluated as B1^T (x - center) + center_value, which is the
/// same affine map but avoids cancellation when the radius is tiny and B1 large.
struct LLRModel {
  Matrix b1;         // n x d
  Vector b0;         // d
  Matrix residuals;  // d x N, column i is e^i
  Vector center;
  Vector center_value;  // B1^T center + B0
  double radius = 0.0;

  std::size_t n() const { return static_cast<std::size_t>(b1.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(b1.cols()); }
  std::size_t sample_count() const { return static_cast<std::size_t>(residuals.cols()); }

  /// Model from explicit coefficients, centred at the origin.
  static LLRModel affine(Matrix b1, Vector b0, Matrix residuals) {
    detail::require_dim(b0.size(), static_cast<std::size_t>(b1.cols()), "LLRModel b0");
    detail::require_dim(residuals.rows(), static_cast<std::size_t>(b1.cols()), "LLRModel residuals");
    LLRModel model;
    model.center = Vector::Zero(b1.rows());
    model.center_value = b0;
    model.b1 = std::move(b1);
    model.b0 = std::move(b0);
    model.residuals = std::move(residuals);
    return model;
  }
};

inline Vector predict(const LLRModel& model, const VectorRef& x) {
  detail::require_dim(x.size(), model.n(), "llr::predict");
  return model.b1.transpose() * (x - model.center) + model.center_value;
}

/// Least-squares fit by column-pivoted QR of the scaled design.
inline LLRModel fit(const PoisedSampleSet& samples) {
  const Eigen::Index n = samples.points.rows();
  if (samples.points.cols() < n + 1) throw SingularFitError("llr::fit: fewer than n + 1 samples");
  const Matrix design = scaled_design(samples.unit_points);
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  if (qr.rank() < design.cols()) throw SingularFitError("llr::fit: rank-deficient design");

  // coefficients of w ~ C_top^T u + C_last, with u = (x - center) / radius
  const Matrix coef = qr.solve(Matrix(samples.responses.transpose()));

  LLRModel model;
  model.b1 = coef.topRows(n) / samples.radius;
  model.b0 = coef.row(n).transpose() - model.b1.transpose() * samples.center;
  model.center = samples.center;
  model.center_value = coef.row(n).transpose();
  model.radius = samples.radius;
  // Same centred coordinates as predict().
  model.residuals = samples.responses - coef.transpose() * design.transpose();
  return model;
}

/// The N_k surrogate scenarios {predict(x) + e^i} as columns.
inline Matrix surrogate_scenarios(const LLRModel& model, const VectorRef& x) {
  const Vector base = predict(model, x);
  return model.residuals.colwise() + base;
}

}  // namespace smdd::llr
