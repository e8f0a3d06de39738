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

// Trust-region method for min_x max_y E_{w ~ D(x)} l(x, y, w) when D(x) is
// only available through sampling.
//
// One iteration:
//   1. fit an affine model of w against x on fresh samples inside B(x_k, delta_k);
//   2. the surrogate L_k(x, y) averages l over the model's residual scenarios;
//   3. step s_k = -delta_k * g / |g| with g = grad_x L_k(x_k, y_k), y_k ~ argmax_y L_k(x_k, .);
//   4. require the surrogate decrease to be >= kappa_dcp |g| min(delta_k, 1);
//   5. rho_k = (v_k - v_{k+1/2}) / surrogate decrease, where v are sample-average
//      estimates of the primal function at x_k and x_k + s_k;
//   6. accept iff rho_k >= eta1 and |g| >= eta2 delta_k; grow or shrink delta.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "smdd_tr/inner.hpp"
#include "smdd_tr/llr.hpp"
#include "smdd_tr/problem.hpp"
#include "smdd_tr/rng.hpp"
#include "smdd_tr/types.hpp"

namespace smdd::tr {

/// Sample-count schedule: either a fixed count or clamp(ceil(scale * max(delta^-exponent, 1)), min, max).
struct SampleCountPolicy {
  enum class Mode { kFixed, kSchedule };

  Mode mode = Mode::kSchedule;
  std::size_t fixed_count = 0;
  double scale = 1.0;
  double exponent = 4.0;
  std::size_t min_count = 0;
  std::size_t max_count = 5000;

  static SampleCountPolicy fixed(std::size_t count) {
    SampleCountPolicy p;
    p.mode = Mode::kFixed;
    p.fixed_count = count;
    return p;
  }

  static SampleCountPolicy schedule(double scale, double exponent, std::size_t min_count, std::size_t max_count) {
    SampleCountPolicy p;
    p.mode = Mode::kSchedule;
    p.scale = scale;
    p.exponent = exponent;
    p.min_count = min_count;
    p.max_count = max_count;
    return p;
  }

  std::size_t count(double delta) const {
    if (mode == Mode::kFixed) return fixed_count;
    const double raw = std::ceil(scale * std::max(std::pow(delta, -exponent), 1.0));
    const double capped = std::min(raw, static_cast<double>(max_count));
    return std::max(min_count, static_cast<std::size_t>(capped));
  }

  void validate(const char* what) const {
    if (mode == Mode::kFixed && fixed_count == 0) throw ConfigError(std::string(what) + ": fixed count must be >= 1");
    if (mode == Mode::kSchedule) {
      if (!(scale > 0.0)) throw ConfigError(std::string(what) + ": scale must be positive");
      if (!(exponent >= 0.0)) throw ConfigError(std::string(what) + ": exponent must be nonnegative");
      if (max_count == 0 || min_count > max_count) throw ConfigError(std::string(what) + ": need 0 < min <= max");
    }
  }
};

/// Inner tolerance epsilon_k = max(scale * min(delta, delta^2), floor).
struct InnerTolerancePolicy {
  double scale = 0.1;
  double floor = 1e-12;

  double epsilon(double delta) const { return std::max(scale * std::min(delta, delta * delta), floor); }
};

/// Optional early exit: surrogate gradient norm and radius both below
/// thresholds for `patience` consecutive iterations.
struct StoppingRule {
  bool enabled = false;
  double grad_tol = 1e-6;
  double delta_tol = 1e-6;
  int patience = 5;
};

struct TRConfig {
  double delta0 = 1.0;
  double delta_max = 2.0;
  double gamma = 2.0;
  double eta1 = 0.25;
  double eta2 = 0.1;
  double kappa_dcp = 1e-3;
  /// N_k. A min_count of 0 means n + 5.
  SampleCountPolicy llr_count = SampleCountPolicy::schedule(1.0, 4.0, 0, 5000);
  /// M_k = |S_k| = |S_{k+1/2}|.
  SampleCountPolicy value_count = SampleCountPolicy::schedule(50.0, 2.0, 50, 5000);
  InnerTolerancePolicy inner_eps;
  llr::PoisednessOptions poisedness;
  std::size_t max_iters = 100;
  std::uint64_t seed = 0;
  /// The run stops once the radius falls below this value.
  double delta_min = 1e-12;
  StoppingRule stop;

  void validate() const {
    if (!(delta_max > 0.0)) throw ConfigError("tr: delta_max must be positive");
    if (!(delta0 > 0.0 && delta0 < delta_max)) throw ConfigError("tr: delta0 must lie in (0, delta_max)");
    if (!(gamma > 1.0)) throw ConfigError("tr: gamma must exceed 1");
    if (!(eta1 > 0.0 && eta1 < 1.0)) throw ConfigError("tr: eta1 must lie in (0, 1)");
    if (!(eta2 > 0.0)) throw ConfigError("tr: eta2 must be positive");
    if (!(kappa_dcp > 0.0)) throw ConfigError("tr: kappa_dcp must be positive");
    if (!(inner_eps.scale > 0.0) || !(inner_eps.floor > 0.0)) throw ConfigError("tr: inner_eps terms must be positive");
    if (!(delta_min >= 0.0)) throw ConfigError("tr: delta_min must be nonnegative");
    llr_count.validate("tr.llr_count");
    value_count.validate("tr.value_count");
  }
};

enum class StepStatus {
  kAccepted,
  kRejected,            // ratio or gradient test failed
  kDescentFailed,       // surrogate sufficient-descent check failed
  kDegenerateGradient,  // surrogate gradient numerically zero
};

inline const char* to_string(StepStatus s) {
  switch (s) {
    case StepStatus::kAccepted: return "accepted";
    case StepStatus::kRejected: return "rejected";
    case StepStatus::kDescentFailed: return "descent_failed";
    case StepStatus::kDegenerateGradient: return "degenerate_gradient";
  }
  return "unknown";
}

struct IterationRecord {
  std::size_t k = 0;
  Vector x_before;
  Vector x_after;
  double delta = 0.0;
  double delta_next = 0.0;
  double rho = 0.0;
  double grad_norm_surrogate = 0.0;
  double v_k = std::nan("");
  double v_k_half = std::nan("");
  double descent_lhs = std::nan("");
  double descent_rhs = std::nan("");
  bool accepted = false;
  StepStatus status = StepStatus::kRejected;
  std::size_t n_llr = 0;
  std::size_t n_value = 0;
  std::size_t n_value_half = 0;
  double b1_frobenius = 0.0;
  double poisedness = 0.0;
  /// Ground truth at x_after, NaN unless diagnostics were requested.
  double true_phi = std::nan("");
  double true_grad_norm = std::nan("");
};

struct TRState {
  Vector x;
  double delta = 0.0;
  std::size_t k = 0;
  Vector y_warm;
  std::vector<IterationRecord> history;
};

using DiagnosticsFn = std::function<PrimalDiagnostics(const VectorRef& x, Rng& rng)>;

struct SurrogateEval {
  double value = 0.0;
  Vector xgrad;
};

/// L_k(x, y) and grad_x L_k(x, y) as exact averages over the residual scenarios.
///
/// The x-gradient carries the chain-rule term B1 * grad3 l because the
/// scenarios themselves move with x.
inline SurrogateEval surrogate_value_and_xgrad(const ProblemSpec& problem, const llr::LLRModel& model,
                                               const VectorRef& x, const VectorRef& y) {
  detail::require_dim(x.size(), problem.n, "surrogate x");
  detail::require_dim(y.size(), problem.m, "surrogate y");
  detail::require_dim(static_cast<Eigen::Index>(model.d()), problem.d, "surrogate model d");
  const Matrix scenarios = llr::surrogate_scenarios(model, x);
  SurrogateEval out;
  out.xgrad = Vector::Zero(static_cast<Eigen::Index>(problem.n));
  Vector chain = Vector::Zero(static_cast<Eigen::Index>(problem.d));
  for (Eigen::Index j = 0; j < scenarios.cols(); ++j) {
    out.value += problem.loss(x, y, scenarios.col(j));
    out.xgrad += problem.grad1(x, y, scenarios.col(j));
    chain += problem.grad3(x, y, scenarios.col(j));
  }
  const double count = static_cast<double>(scenarios.cols());
  out.value /= count;
  out.xgrad = (out.xgrad + model.b1 * chain) / count;
  return out;
}

/// Gradient norms below this are treated as zero by trial_step.
inline constexpr double kDegenerateGradient = 1e-12;

/// -delta * grad / |grad|, or nullopt when the gradient is numerically zero.
inline std::optional<Vector> trial_step(const VectorRef& grad, double delta) {
  if (!(delta > 0.0)) throw ConfigError("trial_step: delta must be positive");
  const double norm = grad.norm();
  if (!(norm >= kDegenerateGradient)) return std::nullopt;
  return Vector(-(delta / norm) * grad);
}

inline double sufficient_descent_threshold(double grad_norm, double delta, double kappa_dcp) {
  return kappa_dcp * grad_norm * std::min(delta, 1.0);
}

inline bool check_sufficient_descent(double lhs_old, double lhs_new, double grad_norm, double delta,
                                     double kappa_dcp) {
  return lhs_old - lhs_new >= sufficient_descent_threshold(grad_norm, delta, kappa_dcp);
}

/// Actual-to-predicted reduction; -inf when the predicted decrease is below 1e-14.
inline double reduction_ratio(double v_k, double v_k_half, double surrogate_decrease) {
  if (!(std::abs(surrogate_decrease) >= 1e-14)) return -std::numeric_limits<double>::infinity();
  return (v_k - v_k_half) / surrogate_decrease;
}

struct RadiusUpdate {
  bool accepted = false;
  double next_delta = 0.0;
};

/// Acceptance rule: accept iff rho >= eta1 and grad_norm >= eta2 * delta.
/// Accepted: delta <- min(gamma delta, delta_max). Rejected: delta <- delta / gamma.
inline RadiusUpdate acceptance_update(double rho, double grad_norm, double delta, const TRConfig& config) {
  RadiusUpdate update;
  update.accepted = rho >= config.eta1 && grad_norm >= config.eta2 * delta;
  update.next_delta = update.accepted ? std::min(config.gamma * delta, config.delta_max) : delta / config.gamma;
  return update;
}

struct ValueEstimate {
  double value = 0.0;
  Vector maximizer;
};

/// Sample-average estimate of the primal value at x on `count` fresh draws,
/// at the inexact maximizer of that same sample average.
inline ValueEstimate estimate_value(const ProblemSpec& problem, const DistributionOracle& oracle, const VectorRef& x,
                                    std::size_t count, double inner_eps, const VectorRef& y_warm, Rng& rng) {
  if (count == 0) throw ConfigError("estimate_value: count must be >= 1");
  const Matrix draws = oracle.sample(x, count, rng);
  auto report = inner::maximize_over_scenarios(problem, x, draws, y_warm, inner_eps);
  ValueEstimate out;
  out.value = inner::scenario_average(problem, x, draws, report.maximizer);
  out.maximizer = std::move(report.maximizer);
  return out;
}

inline TRState initial_state(const VectorRef& x0, const ProblemSpec& problem, const TRConfig& config) {
  detail::require_dim(x0.size(), problem.n, "tr x0");
  TRState state;
  state.x = x0;
  state.delta = config.delta0;
  state.y_warm = problem.inner_domain.center();
  return state;
}

namespace streams {

inline constexpr std::uint64_t kDiagnosticsStream = 0x5eed'd1a6'0000'0001ULL;

inline Rng iteration_rng(std::uint64_t seed, std::size_t k) { return Rng(seed).split(k); }

inline Rng diagnostics_rng(std::uint64_t seed, std::size_t k) {
  return Rng(seed).split(kDiagnosticsStream).split(k);
}

}  // namespace streams

/// One full iteration; appends its record to `state.history`.
inline TRState iterate(TRState state, const ProblemSpec& problem, const DistributionOracle& oracle,
                       const TRConfig& config) {
  const double delta = state.delta;
  const Vector x = state.x;
  const auto n = problem.n;
  Rng iteration_rng = streams::iteration_rng(config.seed, state.k);

  IterationRecord rec;
  rec.k = state.k;
  rec.x_before = x;
  rec.delta = delta;

  // Local model on fresh samples in the trust region.
  llr::PoisednessOptions poised = config.poisedness;
  std::size_t n_llr = config.llr_count.count(delta);
  if (config.llr_count.mode == SampleCountPolicy::Mode::kSchedule && config.llr_count.min_count == 0) {
    n_llr = std::max(n_llr, n + 5);
  }
  if (n_llr < n + 1) throw ConfigError("tr: N_k = " + std::to_string(n_llr) + " is below n + 1");
  const llr::PoisedSampleSet samples = llr::generate_poised_set(oracle, x, delta, n_llr, iteration_rng.split(0), poised);
  const llr::LLRModel model = llr::fit(samples);
  rec.n_llr = n_llr;
  rec.poisedness = samples.poisedness_metric;
  rec.b1_frobenius = model.b1.norm();

  const double eps = config.inner_eps.epsilon(delta);

  // Surrogate maximizer and gradient at the centre.
  const Vector y_old =
      inner::maximize_over_scenarios(problem, x, llr::surrogate_scenarios(model, x), state.y_warm, eps).maximizer;
  const SurrogateEval at_center = surrogate_value_and_xgrad(problem, model, x, y_old);
  rec.grad_norm_surrogate = at_center.xgrad.norm();

  auto reject = [&](StepStatus status) {
    rec.status = status;
    rec.rho = -std::numeric_limits<double>::infinity();
    rec.accepted = false;
    rec.delta_next = delta / config.gamma;
    rec.x_after = x;
    state.delta = rec.delta_next;
    state.y_warm = y_old;
  };

  const std::optional<Vector> step = trial_step(at_center.xgrad, delta);
  if (!step) {
    reject(StepStatus::kDegenerateGradient);
  } else {
    const Vector x_trial = x + *step;
    const Vector y_new =
        inner::maximize_over_scenarios(problem, x_trial, llr::surrogate_scenarios(model, x_trial), y_old, eps)
            .maximizer;
    const double surrogate_new =
        inner::scenario_average(problem, x_trial, llr::surrogate_scenarios(model, x_trial), y_new);
    rec.descent_lhs = at_center.value - surrogate_new;
    rec.descent_rhs = sufficient_descent_threshold(rec.grad_norm_surrogate, delta, config.kappa_dcp);

    if (!check_sufficient_descent(at_center.value, surrogate_new, rec.grad_norm_surrogate, delta,
                                  config.kappa_dcp)) {
      reject(StepStatus::kDescentFailed);
    } else {
      const std::size_t m_k = config.value_count.count(delta);
      Rng old_rng = iteration_rng.split(1);
      Rng new_rng = iteration_rng.split(2);
      const ValueEstimate v_old = estimate_value(problem, oracle, x, m_k, eps, state.y_warm, old_rng);
      const ValueEstimate v_new = estimate_value(problem, oracle, x_trial, m_k, eps, v_old.maximizer, new_rng);
      rec.v_k = v_old.value;
      rec.v_k_half = v_new.value;
      rec.n_value = m_k;
      rec.n_value_half = m_k;
      rec.rho = reduction_ratio(v_old.value, v_new.value, rec.descent_lhs);

      const RadiusUpdate update = acceptance_update(rec.rho, rec.grad_norm_surrogate, delta, config);
      rec.accepted = update.accepted;
      rec.delta_next = update.next_delta;
      rec.status = update.accepted ? StepStatus::kAccepted : StepStatus::kRejected;
      rec.x_after = update.accepted ? x_trial : x;
      state.delta = update.next_delta;
      state.y_warm = update.accepted ? y_new : y_old;
    }
  }

  state.x = rec.x_after;
  ++state.k;
  state.history.push_back(std::move(rec));
  return state;
}

enum class StopReason { kMaxIterations, kStoppingRule, kRadiusFloor };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::kMaxIterations: return "max_iterations";
    case StopReason::kStoppingRule: return "stopping_rule";
    case StopReason::kRadiusFloor: return "radius_floor";
  }
  return "unknown";
}

struct SolveResult {
  TRState state;
  StopReason stop_reason = StopReason::kMaxIterations;
  /// Diagnostics at x0 (NaN fields when no diagnostics function was given).
  PrimalDiagnostics initial;
};

/// Runs up to config.max_iters iterations from x0.
///
/// When `diagnostics` is set, every record gets the ground truth at its
/// x_after, drawn from a stream separate from the algorithm's own, so the
/// iterates do not depend on whether diagnostics are on.
inline SolveResult solve(const VectorRef& x0, const ProblemSpec& problem, const DistributionOracle& oracle,
                         const TRConfig& config, const DiagnosticsFn& diagnostics = {}) {
  config.validate();
  problem.validate();
  SolveResult result;
  result.state = initial_state(x0, problem, config);
  result.state.history.reserve(config.max_iters);

  std::optional<PrimalDiagnostics> last;
  Vector last_x;
  if (diagnostics) {
    Rng rng = Rng(config.seed).split(streams::kDiagnosticsStream).split(std::numeric_limits<std::uint64_t>::max());
    result.initial = diagnostics(x0, rng);
    last = result.initial;
    last_x = x0;
  }

  int quiet_iterations = 0;
  while (result.state.k < config.max_iters) {
    if (result.state.delta < config.delta_min) {
      result.stop_reason = StopReason::kRadiusFloor;
      break;
    }
    result.state = iterate(std::move(result.state), problem, oracle, config);
    IterationRecord& rec = result.state.history.back();
    if (diagnostics) {
      if (!last || rec.x_after != last_x) {
        Rng rng = streams::diagnostics_rng(config.seed, rec.k);
        last = diagnostics(rec.x_after, rng);
        last_x = rec.x_after;
      }
      rec.true_phi = last->phi;
      rec.true_grad_norm = last->grad_norm;
    }
    if (config.stop.enabled) {
      const bool quiet = rec.grad_norm_surrogate < config.stop.grad_tol && rec.delta_next < config.stop.delta_tol;
      quiet_iterations = quiet ? quiet_iterations + 1 : 0;
      if (quiet_iterations >= config.stop.patience) {
        result.stop_reason = StopReason::kStoppingRule;
        break;
      }
    }
  }
  return result;
}

}  // namespace smdd::tr
