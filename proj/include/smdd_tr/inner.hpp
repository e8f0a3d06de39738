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
#include <string>
#include <vector>

#include "smdd_tr/domain.hpp"
#include "smdd_tr/problem.hpp"
#include "smdd_tr/types.hpp"

namespace smdd::inner {

struct InnerSolveReport {
  Vector maximizer;
  std::size_t iterations = 0;
  double final_step_norm = 0.0;
  double tolerance_target = 0.0;
  /// Certified bound (L/mu + 1) * final_step_norm on the distance to the maximizer.
  double distance_bound = 0.0;
  /// Objective after each iteration; filled only when requested.
  std::vector<double> value_trace;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, InnerSolveReport report) : Error(what), report_(std::move(report)) {}
  const InnerSolveReport& report() const { return report_; }

 private:
  InnerSolveReport report_;
};

struct InnerOptions {
  /// Smoothness bound of the scenario average in y; <= 0 uses problem.inner_smoothness.
  double smoothness = 0.0;
  std::size_t max_iterations = 100000;
  bool record_values = false;
};

/// Scenario average g(y) = mean_j l(x, y, w^j).
inline double scenario_average(const ProblemSpec& problem, const VectorRef& x, const Matrix& scenarios,
                               const VectorRef& y) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < scenarios.cols(); ++j) total += problem.loss(x, y, scenarios.col(j));
  return total / static_cast<double>(scenarios.cols());
}

inline Vector scenario_average_ygrad(const ProblemSpec& problem, const VectorRef& x, const Matrix& scenarios,
                                     const VectorRef& y) {
  Vector total = Vector::Zero(static_cast<Eigen::Index>(problem.m));
  for (Eigen::Index j = 0; j < scenarios.cols(); ++j) total += problem.grad2(x, y, scenarios.col(j));
  return total / static_cast<double>(scenarios.cols());
}

/// Projected gradient ascent on the scenario average with stepsize 1/L.
///
/// Stops once (L/mu + 1) * |y_{t+1} - y_t| <= epsilon, which bounds the
/// distance of y_{t+1} to the exact maximizer for a mu-strongly concave,
/// L-smooth objective. Throws NonConvergenceError past the iteration cap.
inline InnerSolveReport maximize_over_scenarios(const ProblemSpec& problem, const VectorRef& x,
                                                const Matrix& scenarios, const VectorRef& y_init, double epsilon,
                                                const InnerOptions& options = {}) {
  if (scenarios.cols() == 0) throw ConfigError("maximize_over_scenarios: no scenarios");
  if (!(epsilon > 0.0)) throw ConfigError("maximize_over_scenarios: epsilon must be positive");
  detail::require_dim(x.size(), problem.n, "inner x");
  detail::require_dim(scenarios.rows(), problem.d, "inner scenarios");
  detail::require_dim(y_init.size(), problem.m, "inner y_init");

  const double smoothness = options.smoothness > 0.0 ? options.smoothness : problem.inner_smoothness;
  if (!(smoothness >= problem.mu)) throw ConfigError("maximize_over_scenarios: smoothness must be >= mu");
  const double certificate_factor = smoothness / problem.mu + 1.0;

  InnerSolveReport report;
  report.tolerance_target = epsilon;
  Vector y = project(problem.inner_domain, y_init);
  if (options.record_values) report.value_trace.push_back(scenario_average(problem, x, scenarios, y));

  while (report.iterations < options.max_iterations) {
    const Vector ascent = scenario_average_ygrad(problem, x, scenarios, y);
    Vector next = project(problem.inner_domain, y + ascent / smoothness);
    report.final_step_norm = (next - y).norm();
    y = std::move(next);
    ++report.iterations;
    if (options.record_values) report.value_trace.push_back(scenario_average(problem, x, scenarios, y));
    if (certificate_factor * report.final_step_norm <= epsilon) {
      report.maximizer = std::move(y);
      report.distance_bound = certificate_factor * report.final_step_norm;
      return report;
    }
  }
  report.maximizer = std::move(y);
  report.distance_bound = certificate_factor * report.final_step_norm;
  throw NonConvergenceError("maximize_over_scenarios: no certificate after " + std::to_string(report.iterations) +
                                " iterations (step " + std::to_string(report.final_step_norm) + ")",
                            std::move(report));
}

}  // namespace smdd::inner
