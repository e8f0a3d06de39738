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

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace smdd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller broke a documented precondition (usually a dimension mismatch).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value: radius, count, threshold, ...
class ConfigError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require_dim(Eigen::Index actual, std::size_t expected, const char* what) {
  if (actual != static_cast<Eigen::Index>(expected)) {
    throw ContractViolation(std::string(what) + ": expected dimension " + std::to_string(expected) +
                            ", got " + std::to_string(actual));
  }
}

inline bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) { return m.allFinite(); }

}  // namespace detail
}  // namespace smdd
