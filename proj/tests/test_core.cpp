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

#include <cmath>
#include <limits>
#include <thread>
#include <vector>

#include "smdd_tr/domain.hpp"
#include "smdd_tr/problem.hpp"
#include "smdd_tr/rng.hpp"
#include "support.hpp"

namespace smdd {
namespace {

// --- Rng ---------------------------------------------------------------------

TEST(Rng, SameSeedSameStream) {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(Rng, DifferentSeedsDiffer) {
  Rng a(1);
  Rng b(2);
  int equal = 0;
  for (int i = 0; i < 100; ++i) equal += a() == b() ? 1 : 0;
  EXPECT_EQ(equal, 0);
}

TEST(Rng, SplitDoesNotAdvanceParentAndIsStable) {
  Rng parent(7);
  const Rng before = parent;
  Rng c1 = parent.split(3);
  Rng c2 = parent.split(3);
  EXPECT_EQ(parent, before);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(c1(), c2());
  Rng other = parent.split(4);
  EXPECT_NE(parent.split(3)(), other());
}

TEST(Rng, UniformInUnitInterval) {
  Rng rng(9);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000.0, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / 100000.0));
}

TEST(Rng, NormalMoments) {
  Rng rng(10);
  const int n = 100000;
  double s = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 5.0 * std::sqrt(2.0 / n));
}

// --- InnerDomain -------------------------------------------------------------

TEST(InnerDomain, BoxRequiresOrderedBounds) {
  EXPECT_THROW(InnerDomain::box(Vector::Constant(2, 1.0), Vector::Constant(2, 1.0)), ConfigError);
  EXPECT_THROW(InnerDomain::box(Vector::Constant(2, 0.0), Vector::Constant(3, 1.0)), ConfigError);
  EXPECT_THROW(InnerDomain::simplex(0), ConfigError);
}

TEST(InnerDomain, Diameters) {
  const auto box = InnerDomain::box((Vector(2) << -1.0, 0.0).finished(), (Vector(2) << 2.0, 4.0).finished());
  EXPECT_DOUBLE_EQ(box.diameter(), 5.0);
  EXPECT_DOUBLE_EQ(InnerDomain::simplex(7).diameter(), std::sqrt(2.0));
}

TEST(InnerDomain, Centers) {
  const auto box = InnerDomain::box((Vector(2) << -1.0, 0.0).finished(), (Vector(2) << 3.0, 4.0).finished());
  EXPECT_EQ(box.center(), (Vector(2) << 1.0, 2.0).finished());
  EXPECT_TRUE(InnerDomain::simplex(4).center().isApprox(Vector::Constant(4, 0.25)));
}

TEST(Project, BoxInteriorPointIsFixed) {
  const auto box = InnerDomain::symmetric_box(1, 125.0);
  EXPECT_EQ(project(box, Vector::Constant(1, 3.0))(0), 3.0);
}

TEST(Project, BoxClampsToBoundary) {
  const auto box = InnerDomain::symmetric_box(1, 125.0);
  EXPECT_EQ(project(box, Vector::Constant(1, 300.0))(0), 125.0);
  EXPECT_EQ(project(box, Vector::Constant(1, -300.0))(0), -125.0);
}

TEST(Project, SimplexVertex) {
  const Vector p = project(InnerDomain::simplex(3), (Vector(3) << 2.0, 0.0, 0.0).finished());
  EXPECT_NEAR((p - (Vector(3) << 1.0, 0.0, 0.0).finished()).norm(), 0.0, 1e-15);
}

TEST(Project, SimplexPointIsFixed) {
  const Vector y = Vector::Constant(3, 1.0 / 3.0);
  EXPECT_NEAR((project(InnerDomain::simplex(3), y) - y).norm(), 0.0, 1e-15);
}

// Brute-force oracle: closest point of a fine grid on the 3-simplex.
TEST(Project, SimplexMatchesGridSearch) {
  Rng rng(11);
  const int steps = 400;
  for (int t = 0; t < 20; ++t) {
    Vector y(3);
    for (int i = 0; i < 3; ++i) y(i) = 2.0 * rng.normal();
    const Vector p = project(InnerDomain::simplex(3), y);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= steps; ++i) {
      for (int j = 0; i + j <= steps; ++j) {
        const Vector q = (Vector(3) << i, j, steps - i - j).finished() / steps;
        best = std::min(best, (y - q).norm());
      }
    }
    EXPECT_TRUE(InnerDomain::simplex(3).contains(p));
    EXPECT_LE((y - p).norm(), best + 1e-12);
  }
}

TEST(Project, SimplexFeasibilityOnManyPoints) {
  Rng rng(12);
  for (int t = 0; t < 10000; ++t) {
    const std::size_t m = 1 + rng() % 20;
    Vector y(static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = 10.0 * rng.normal();
    const Vector p = project(InnerDomain::simplex(m), y);
    ASSERT_NEAR(p.sum(), 1.0, 1e-12);
    ASSERT_GE(p.minCoeff(), -1e-14);
  }
}

TEST(Project, IdempotentAndNonexpansive) {
  Rng rng(13);
  const auto box = InnerDomain::box((Vector(4) << -1, -2, 0, 3).finished(), (Vector(4) << 1, 2, 5, 4).finished());
  const auto simplex = InnerDomain::simplex(4);
  for (int t = 0; t < 1000; ++t) {
    Vector a(4);
    Vector b(4);
    for (int i = 0; i < 4; ++i) {
      a(i) = 3.0 * rng.normal();
      b(i) = 3.0 * rng.normal();
    }
    for (const auto* dom : {&box, &simplex}) {
      const Vector pa = project(*dom, a);
      const Vector pb = project(*dom, b);
      EXPECT_TRUE(dom->contains(pa));
      EXPECT_LE((project(*dom, pa) - pa).norm(), 1e-15);
      EXPECT_LE((pa - pb).norm(), (a - b).norm() + 1e-12);
    }
  }
}

TEST(Project, DimensionMismatchIsContractViolation) {
  EXPECT_THROW(project(InnerDomain::simplex(3), Vector::Zero(2)), ContractViolation);
  EXPECT_THROW(project(InnerDomain::symmetric_box(2, 1.0), Vector::Zero(3)), ContractViolation);
}

// --- uniform_ball_sample ----------------------------------------------------

TEST(UniformBall, PointsInsideUnitBall) {
  Rng rng(14);
  const Matrix pts = uniform_ball_sample(Vector::Zero(3), 1.0, 1000, rng);
  ASSERT_EQ(pts.cols(), 1000);
  for (Eigen::Index i = 0; i < pts.cols(); ++i) EXPECT_LE(pts.col(i).norm(), 1.0);
}

// Uniform on [9.5, 10.5]: sd = 0.5 / sqrt(3), so 5 sigma of a 100-sample mean is 0.144.
TEST(UniformBall, SampleMeanConcentrates) {
  Rng rng(15);
  const Matrix pts = uniform_ball_sample(Vector::Constant(1, 10.0), 0.5, 100, rng);
  EXPECT_NEAR(pts.row(0).mean(), 10.0, 0.15);
}

// P(|u| <= r) = r^n for the uniform ball.
TEST(UniformBall, RadialDistribution) {
  Rng rng(16);
  const int count = 20000;
  const Matrix pts = uniform_ball_sample(Vector::Zero(4), 2.0, count, rng);
  int inside = 0;
  for (Eigen::Index i = 0; i < pts.cols(); ++i) inside += pts.col(i).norm() <= 1.0 ? 1 : 0;
  const double p = std::pow(0.5, 4);
  EXPECT_NEAR(static_cast<double>(inside) / count, p, 5.0 * std::sqrt(p * (1 - p) / count));
}

TEST(UniformBall, RejectsBadArguments) {
  Rng rng(17);
  EXPECT_THROW(uniform_ball_sample(Vector::Zero(2), 0.0, 5, rng), ConfigError);
  EXPECT_THROW(uniform_ball_sample(Vector::Zero(2), -1.0, 5, rng), ConfigError);
  EXPECT_THROW(uniform_ball_sample(Vector::Zero(2), 1.0, 0, rng), ConfigError);
}

// --- DistributionOracle / ProblemSpec ---------------------------------------

DistributionOracle gaussian_oracle() {
  DistributionOracle oracle;
  oracle.d = 2;
  oracle.sampler = [](const VectorRef& x, std::size_t count, Rng& rng) {
    Matrix draws(2, static_cast<Eigen::Index>(count));
    for (Eigen::Index j = 0; j < draws.cols(); ++j) {
      draws(0, j) = x(0) + rng.normal();
      draws(1, j) = -x(0) + rng.normal();
    }
    return draws;
  };
  return oracle;
}

TEST(DistributionOracle, ReproducibleAndShaped) {
  const auto oracle = gaussian_oracle();
  Rng a(5);
  Rng b(5);
  const Matrix da = oracle.sample(Vector::Constant(1, 1.0), 7, a);
  const Matrix db = oracle.sample(Vector::Constant(1, 1.0), 7, b);
  EXPECT_EQ(da.rows(), 2);
  EXPECT_EQ(da.cols(), 7);
  EXPECT_EQ(da, db);
  EXPECT_THROW(oracle.sample(Vector::Constant(1, 1.0), 0, a), ConfigError);
}

TEST(DistributionOracle, ConcurrentCallsWithOwnStreams) {
  const auto oracle = gaussian_oracle();
  std::vector<Matrix> serial(4);
  for (std::uint64_t s = 0; s < 4; ++s) {
    Rng rng = Rng(99).split(s);
    serial[s] = oracle.sample(Vector::Constant(1, 0.5), 50, rng);
  }
  std::vector<Matrix> parallel(4);
  std::vector<std::thread> threads;
  for (std::uint64_t s = 0; s < 4; ++s) {
    threads.emplace_back([&, s] {
      Rng rng = Rng(99).split(s);
      parallel[s] = oracle.sample(Vector::Constant(1, 0.5), 50, rng);
    });
  }
  for (auto& t : threads) t.join();
  for (std::size_t s = 0; s < 4; ++s) EXPECT_EQ(serial[s], parallel[s]);
}

TEST(DistributionOracle, WrongShapeIsContractViolation) {
  DistributionOracle oracle;
  oracle.d = 3;
  oracle.sampler = [](const VectorRef&, std::size_t count, Rng&) {
    return Matrix::Zero(2, static_cast<Eigen::Index>(count)).eval();
  };
  Rng rng(1);
  EXPECT_THROW(oracle.sample(Vector::Zero(1), 4, rng), ContractViolation);
}

TEST(ProblemSpec, ValidateRejectsBadSpecs) {
  ProblemSpec spec = testing::quadratic_spec(Matrix::Identity(2, 2), InnerDomain::simplex(2));
  EXPECT_NO_THROW(spec.validate());
  ProblemSpec bad = spec;
  bad.mu = 0.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = spec;
  bad.inner_domain = InnerDomain::simplex(3);
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = spec;
  bad.grad3 = nullptr;
  EXPECT_THROW(bad.validate(), ConfigError);
}

// grad2 vanishes at an interior maximizer of a strongly concave loss.
TEST(ProblemSpec, Grad2ZeroAtInteriorMaximizer) {
  const Matrix h = (Matrix(2, 2) << 2.0, 0.5, 0.5, 1.0).finished();
  const ProblemSpec spec = testing::quadratic_spec(h, InnerDomain::symmetric_box(2, 5.0));
  const Vector w = (Vector(2) << 0.3, -1.2).finished();
  EXPECT_NEAR(spec.grad2(Vector::Zero(1), w, w).norm(), 0.0, 1e-15);
}

}  // namespace
}  // namespace smdd
