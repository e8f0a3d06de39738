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

#include <gtest/gtest.h>

#include "smdd_tr/inner.hpp"
#include "smdd_tr/problems/synthetic.hpp"
#include "support.hpp"

namespace smdd::inner {
namespace {

const Vector kX = Vector::Zero(1);

ProblemSpec scalar_quadratic(double half_width) {
  return testing::quadratic_spec(Matrix::Constant(1, 1, 2.0), InnerDomain::symmetric_box(1, half_width));
}

TEST(Inner, UnconstrainedScalarQuadratic) {
  const auto spec = scalar_quadratic(125.0);
  const auto report = maximize_over_scenarios(spec, kX, Matrix::Constant(1, 1, 3.0), Vector::Zero(1), 1e-10);
  EXPECT_NEAR(report.maximizer(0), 3.0, 1e-10);
  EXPECT_LE(report.distance_bound, 1e-10);
}

TEST(Inner, SyntheticMaximizerIsMinusScenarioMean) {
  const auto spec = problems::synthetic_spec();
  const Matrix scenarios = (Matrix(1, 3) << 7.0, 8.0, 9.0).finished();
  const auto report = maximize_over_scenarios(spec, Vector::Constant(1, 2.0), scenarios, Vector::Zero(1), 1e-10);
  EXPECT_NEAR(report.maximizer(0), -8.0, 1e-10);
}

TEST(Inner, ActiveBoundary) {
  const auto spec = scalar_quadratic(125.0);
  const auto report = maximize_over_scenarios(spec, kX, Matrix::Constant(1, 1, 200.0), Vector::Zero(1), 1e-10);
  EXPECT_DOUBLE_EQ(report.maximizer(0), 125.0);
}

TEST(Inner, SimplexRegularizerGivesUniformWeights) {
  const std::size_t m = 7;
  const auto spec = testing::quadratic_spec(Matrix::Identity(m, m), InnerDomain::simplex(m));
  Vector start = Vector::Zero(m);
  start(0) = 1.0;
  const auto report = maximize_over_scenarios(spec, kX, Matrix::Zero(m, 1), start, 1e-12);
  EXPECT_LE((report.maximizer - Vector::Constant(m, 1.0 / m)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Inner, ValuesIncreaseMonotonically) {
  Rng rng(21);
  const auto planted = testing::planted_quadratic(false, 4, rng);
  InnerOptions options;
  options.record_values = true;
  const auto report = maximize_over_scenarios(planted.spec, kX, planted.scenarios,
                                              Vector::Constant(4, 10.0), 1e-9, options);
  ASSERT_EQ(report.value_trace.size(), report.iterations + 1);
  for (std::size_t i = 1; i < report.value_trace.size(); ++i) {
    EXPECT_GE(report.value_trace[i], report.value_trace[i - 1] - 1e-12);
  }
}

TEST(Inner, StartAtMaximizerTerminatesImmediately) {
  const auto spec = scalar_quadratic(125.0);
  const auto report = maximize_over_scenarios(spec, kX, Matrix::Constant(1, 1, 3.0), Vector::Constant(1, 3.0), 1e-6);
  EXPECT_EQ(report.iterations, 1u);
  EXPECT_LE(report.final_step_norm, 1e-10);
}

TEST(Inner, PlantedInstancesWithinCertifiedDistance) {
  Rng rng(22);
  for (int t = 0; t < 50; ++t) {
    const bool simplex = t % 2 == 0;
    const std::size_t m = 2 + rng() % 6;
    const auto planted = testing::planted_quadratic(simplex, m, rng);
    const double eps = 1e-6;
    Vector start = planted.spec.inner_domain.center();
    for (Eigen::Index i = 0; i < start.size(); ++i) start(i) += rng.normal();
    const auto report = maximize_over_scenarios(planted.spec, kX, planted.scenarios, start, eps);
    EXPECT_TRUE(planted.spec.inner_domain.contains(report.maximizer, 1e-10));
    EXPECT_LE((report.maximizer - planted.maximizer).norm(), eps) << "instance " << t;
  }
}

TEST(Inner, IterationCapRaisesWithReport) {
  Rng rng(23);
  const auto planted = testing::planted_quadratic(false, 5, rng);
  InnerOptions options;
  options.max_iterations = 2;
  try {
    maximize_over_scenarios(planted.spec, kX, planted.scenarios, Vector::Constant(5, 50.0), 1e-14, options);
    FAIL() << "expected NonConvergenceError";
  } catch (const NonConvergenceError& e) {
    EXPECT_EQ(e.report().iterations, 2u);
    EXPECT_GT(e.report().distance_bound, 1e-14);
  }
}

TEST(Inner, InvalidArguments) {
  const auto spec = scalar_quadratic(1.0);
  EXPECT_THROW(maximize_over_scenarios(spec, kX, Matrix::Zero(1, 1), Vector::Zero(1), 0.0), ConfigError);
  EXPECT_THROW(maximize_over_scenarios(spec, kX, Matrix::Zero(1, 1), Vector::Zero(1), -1.0), ConfigError);
  EXPECT_THROW(maximize_over_scenarios(spec, kX, Matrix::Zero(1, 0), Vector::Zero(1), 1e-6), ConfigError);
  EXPECT_THROW(maximize_over_scenarios(spec, kX, Matrix::Zero(2, 1), Vector::Zero(1), 1e-6), ContractViolation);
  InnerOptions options;
  options.smoothness = 0.5;
  EXPECT_THROW(maximize_over_scenarios(spec, kX, Matrix::Zero(1, 1), Vector::Zero(1), 1e-6, options), ConfigError);
}

TEST(Inner, ScenarioAverageAndGradient) {
  const auto spec = problems::synthetic_spec();
  const Matrix scenarios = (Matrix(1, 2) << 1.0, 3.0).finished();
  const Vector x = Vector::Constant(1, 1.0);
  const Vector y = Vector::Constant(1, 0.5);
  // mean of 1 - 2 * 1.5 * w - 0.25 over w in {1, 3}
  EXPECT_DOUBLE_EQ(scenario_average(spec, x, scenarios, y), 1.0 - 3.0 * 2.0 - 0.25);
  EXPECT_DOUBLE_EQ(scenario_average_ygrad(spec, x, scenarios, y)(0), -2.0 * 2.0 - 1.0);
}

}  // namespace
}  // namespace smdd::inner
