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

// JSON run configuration.
//
// Parsing never stops at the first problem: unknown keys, type mismatches and
// out-of-range values are all collected and reported together, one
// "path: message" line per offending key.

#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "smdd_tr/baselines.hpp"
#include "smdd_tr/tr.hpp"

namespace smdd::cli {

using Json = nlohmann::json;

enum class ProblemKind { kSynthetic, kDro };
enum class SolverKind { kTr, kAsgda, kSpdConstant, kSpdDynamic };

inline constexpr const char* kSolverNames = "tr, asgda, spd-constant, spd-dynamic";
inline constexpr const char* kProblemNames = "synthetic, dro";

inline const char* to_string(ProblemKind p) { return p == ProblemKind::kSynthetic ? "synthetic" : "dro"; }

inline const char* to_string(SolverKind s) {
  switch (s) {
    case SolverKind::kTr: return "tr";
    case SolverKind::kAsgda: return "asgda";
    case SolverKind::kSpdConstant: return "spd-constant";
    case SolverKind::kSpdDynamic: return "spd-dynamic";
  }
  return "unknown";
}

inline std::optional<SolverKind> parse_solver(const std::string& name) {
  if (name == "tr") return SolverKind::kTr;
  if (name == "asgda") return SolverKind::kAsgda;
  if (name == "spd-constant") return SolverKind::kSpdConstant;
  if (name == "spd-dynamic") return SolverKind::kSpdDynamic;
  return std::nullopt;
}

struct SyntheticSettings {
  double noise_sigma = 1.0;
  double box_half_width = 125.0;
  double x0_center = 10.0;
  double x0_radius = 0.5;
  /// Baselines only: y0 is drawn uniformly from B(y0_center, y0_radius).
  double y0_center = 10.0;
  double y0_radius = 0.5;
};

struct DroSettings {
  /// Empty: generate planted-logistic data instead of reading a CSV.
  std::string dataset;
  std::string label_column = "SeriousDlqin2yrs";
  std::vector<std::string> features;
  std::size_t rows = 200;
  std::uint64_t subsample_seed = 0;
  std::size_t n_features = 5;
  std::uint64_t data_seed = 7;
  double shift_scale = 5.0;
  double lambda1 = 1.0;
  /// NaN selects 10 / N^2.
  double lambda2 = std::numeric_limits<double>::quiet_NaN();
  double alpha = 1.0;
  double feature_noise = 0.0;
  double x0_center = 1.0;
  double x0_radius = 0.5;
  std::size_t diagnostic_samples = 5000;
};

struct RunConfig {
  ProblemKind problem = ProblemKind::kSynthetic;
  SolverKind solver = SolverKind::kTr;
  std::vector<std::uint64_t> seeds{1};
  /// Empty: <output root>/<problem>_<solver>.
  std::string output_dir;
  std::size_t workers = 1;
  bool log_oracle_diagnostics = true;
  tr::TRConfig tr;
  baselines::BaselineConfig baseline;
  SyntheticSettings synthetic;
  DroSettings dro;

  bool is_baseline() const { return solver != SolverKind::kTr; }
};

/// Baseline defaults differ between the two benchmarks.
inline baselines::BaselineConfig default_baseline(ProblemKind problem) {
  baselines::BaselineConfig b;
  if (problem == ProblemKind::kDro) {
    b.eta = 1e-2;
    b.dynamic_a = 10.0;
    b.dynamic_b = 1.0;
    b.batch = 200;
    b.max_iters = 100;
  }
  return b;
}

inline tr::TRConfig default_tr(ProblemKind problem) {
  tr::TRConfig c;
  c.llr_count = tr::SampleCountPolicy::fixed(300);
  c.value_count = tr::SampleCountPolicy::fixed(100);
  c.max_iters = problem == ProblemKind::kSynthetic ? 300 : 100;
  return c;
}

namespace detail {

// JSON files parse nonnegative integers as unsigned, but programmatically
// built documents hold them signed; accept both.
inline bool is_nonnegative_integer(const Json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

// Walks one JSON object, remembering which keys were read so leftovers can be
// reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const Json& obj, std::string path, std::vector<std::string>& errors)
      : obj_(obj), path_(std::move(path)), errors_(errors) {
    if (!obj_.is_object()) fail("", "expected an object");
  }

  ~ObjectReader() = default;
  ObjectReader(const ObjectReader&) = delete;
  ObjectReader& operator=(const ObjectReader&) = delete;

  bool ok() const { return obj_.is_object(); }

  const Json* find(const std::string& key) {
    if (!ok()) return nullptr;
    seen_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  std::string path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void fail(const std::string& key, const std::string& message) {
    errors_.push_back((key.empty() ? (path_.empty() ? std::string("<root>") : path_) : path(key)) + ": " + message);
  }

  void number(const std::string& key, double& out) {
    const Json* v = find(key);
    if (!v) return;
    if (!v->is_number()) return fail(key, "expected a number");
    out = v->get<double>();
  }

  void positive(const std::string& key, double& out) {
    const Json* v = find(key);
    if (!v) return;
    if (!v->is_number() || !(v->get<double>() > 0.0)) return fail(key, "expected a positive number");
    out = v->get<double>();
  }

  void nonnegative(const std::string& key, double& out) {
    const Json* v = find(key);
    if (!v) return;
    if (!v->is_number() || !(v->get<double>() >= 0.0)) return fail(key, "expected a nonnegative number");
    out = v->get<double>();
  }

  template <typename Int>
  void count(const std::string& key, Int& out, Int min_value = 0) {
    const Json* v = find(key);
    if (!v) return;
    if (!is_nonnegative_integer(*v) || v->get<std::uint64_t>() < static_cast<std::uint64_t>(min_value)) {
      return fail(key, "expected an integer >= " + std::to_string(min_value));
    }
    out = static_cast<Int>(v->get<std::uint64_t>());
  }

  void boolean(const std::string& key, bool& out) {
    const Json* v = find(key);
    if (!v) return;
    if (!v->is_boolean()) return fail(key, "expected true or false");
    out = v->get<bool>();
  }

  void string(const std::string& key, std::string& out) {
    const Json* v = find(key);
    if (!v) return;
    if (!v->is_string()) return fail(key, "expected a string");
    out = v->get<std::string>();
  }

  void report_unknown() {
    if (!ok()) return;
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.contains(it.key())) fail(it.key(), "unknown key");
    }
  }

 private:
  const Json& obj_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

inline void read_count_policy(ObjectReader& parent, const std::string& key, tr::SampleCountPolicy& out,
                              std::vector<std::string>& errors) {
  const Json* v = parent.find(key);
  if (!v) return;
  if (v->is_number()) {
    if (!is_nonnegative_integer(*v) || v->get<std::uint64_t>() == 0) return parent.fail(key, "expected an integer >= 1");
    out = tr::SampleCountPolicy::fixed(v->get<std::size_t>());
    return;
  }
  ObjectReader r(*v, parent.path(key), errors);
  if (!r.ok()) return;
  std::string mode = out.mode == tr::SampleCountPolicy::Mode::kFixed ? "fixed" : "schedule";
  r.string("mode", mode);
  if (mode == "fixed") {
    std::size_t c = out.mode == tr::SampleCountPolicy::Mode::kFixed ? out.fixed_count : 0;
    r.count("count", c, std::size_t{1});
    if (c == 0) r.fail("count", "required for mode 'fixed'");
    out = tr::SampleCountPolicy::fixed(c);
  } else if (mode == "schedule") {
    tr::SampleCountPolicy p = out.mode == tr::SampleCountPolicy::Mode::kSchedule
                                  ? out
                                  : tr::SampleCountPolicy::schedule(1.0, 4.0, 0, 5000);
    r.positive("scale", p.scale);
    r.nonnegative("exponent", p.exponent);
    r.count("min", p.min_count);
    r.count("max", p.max_count, std::size_t{1});
    if (p.min_count > p.max_count) r.fail("min", "must not exceed max");
    out = p;
  } else {
    r.fail("mode", "expected 'fixed' or 'schedule', got '" + mode + "'");
  }
  r.report_unknown();
}

inline void read_tr(const Json& node, tr::TRConfig& c, std::vector<std::string>& errors) {
  ObjectReader r(node, "tr", errors);
  if (!r.ok()) return;
  r.positive("delta0", c.delta0);
  r.positive("delta_max", c.delta_max);
  r.positive("gamma", c.gamma);
  r.positive("eta1", c.eta1);
  r.positive("eta2", c.eta2);
  r.positive("kappa_dcp", c.kappa_dcp);
  r.nonnegative("delta_min", c.delta_min);
  read_count_policy(r, "llr_count", c.llr_count, errors);
  read_count_policy(r, "value_count", c.value_count, errors);
  if (const Json* eps = r.find("inner_eps")) {
    ObjectReader e(*eps, "tr.inner_eps", errors);
    e.positive("scale", c.inner_eps.scale);
    e.positive("floor", c.inner_eps.floor);
    e.report_unknown();
  }
  r.positive("lambda_max", c.poisedness.lambda_max);
  r.count("poisedness_rounds", c.poisedness.max_rounds, 1);
  if (const Json* stop = r.find("stop")) {
    ObjectReader s(*stop, "tr.stop", errors);
    s.boolean("enabled", c.stop.enabled);
    s.positive("grad_tol", c.stop.grad_tol);
    s.positive("delta_tol", c.stop.delta_tol);
    s.count("patience", c.stop.patience, 1);
    s.report_unknown();
  }
  r.report_unknown();
  if (c.gamma <= 1.0) r.fail("gamma", "must exceed 1");
  if (c.eta1 >= 1.0) r.fail("eta1", "must lie in (0, 1)");
  if (c.delta0 >= c.delta_max) r.fail("delta0", "must be below delta_max");
}

inline void read_baseline(const Json& node, baselines::BaselineConfig& c, std::vector<std::string>& errors) {
  ObjectReader r(node, "baseline", errors);
  if (!r.ok()) return;
  r.positive("eta_x", c.eta_x);
  r.positive("eta_y", c.eta_y);
  r.positive("eta", c.eta);
  r.positive("dynamic_a", c.dynamic_a);
  r.nonnegative("dynamic_b", c.dynamic_b);
  r.count("batch", c.batch, std::size_t{1});
  r.positive("forgetting", c.forgetting);
  r.nonnegative("ridge", c.ridge);
  r.positive("divergence_threshold", c.divergence_threshold);
  r.report_unknown();
  if (c.forgetting > 1.0) r.fail("forgetting", "must lie in (0, 1]");
}

inline void read_synthetic(const Json& node, SyntheticSettings& s, std::vector<std::string>& errors) {
  ObjectReader r(node, "synthetic", errors);
  if (!r.ok()) return;
  r.nonnegative("noise_sigma", s.noise_sigma);
  r.positive("box_half_width", s.box_half_width);
  r.number("x0_center", s.x0_center);
  r.positive("x0_radius", s.x0_radius);
  r.number("y0_center", s.y0_center);
  r.positive("y0_radius", s.y0_radius);
  r.report_unknown();
}

inline void read_dro(const Json& node, DroSettings& s, std::vector<std::string>& errors) {
  ObjectReader r(node, "dro", errors);
  if (!r.ok()) return;
  r.string("dataset", s.dataset);
  r.string("label_column", s.label_column);
  if (const Json* f = r.find("features")) {
    if (!f->is_array() || !std::all_of(f->begin(), f->end(), [](const Json& e) { return e.is_string(); })) {
      r.fail("features", "expected an array of column names");
    } else {
      s.features = f->get<std::vector<std::string>>();
    }
  }
  r.count("rows", s.rows, std::size_t{2});
  r.count("subsample_seed", s.subsample_seed);
  r.count("n_features", s.n_features, std::size_t{1});
  r.count("data_seed", s.data_seed);
  r.number("shift_scale", s.shift_scale);
  r.nonnegative("lambda1", s.lambda1);
  r.positive("lambda2", s.lambda2);
  r.positive("alpha", s.alpha);
  r.nonnegative("feature_noise", s.feature_noise);
  r.number("x0_center", s.x0_center);
  r.positive("x0_radius", s.x0_radius);
  r.count("diagnostic_samples", s.diagnostic_samples, std::size_t{1});
  r.report_unknown();
}

}  // namespace detail

/// Builds a RunConfig from a parsed JSON document. Throws ConfigError listing
/// every offending key.
inline RunConfig parse_run_config(const Json& doc) {
  std::vector<std::string> errors;
  RunConfig config;
  detail::ObjectReader root(doc, "", errors);
  if (root.ok()) {
    if (const Json* p = root.find("problem")) {
      if (p->is_string() && *p == "synthetic") {
        config.problem = ProblemKind::kSynthetic;
      } else if (p->is_string() && *p == "dro") {
        config.problem = ProblemKind::kDro;
      } else {
        root.fail("problem", std::string("unknown problem; valid options: ") + kProblemNames);
      }
    }
    if (const Json* s = root.find("solver")) {
      const auto kind = s->is_string() ? parse_solver(s->get<std::string>()) : std::nullopt;
      if (kind) {
        config.solver = *kind;
      } else {
        root.fail("solver", std::string("unknown solver ") + s->dump() + "; valid options: " + kSolverNames);
      }
    }
    config.tr = default_tr(config.problem);
    config.baseline = default_baseline(config.problem);

    if (const Json* seeds = root.find("seeds")) {
      if (!seeds->is_array() || seeds->empty() ||
          !std::all_of(seeds->begin(), seeds->end(), [](const Json& e) { return detail::is_nonnegative_integer(e); })) {
        root.fail("seeds", "expected a nonempty array of nonnegative integers");
      } else {
        config.seeds = seeds->get<std::vector<std::uint64_t>>();
      }
    }
    root.string("output_dir", config.output_dir);
    root.count("workers", config.workers, std::size_t{1});
    root.boolean("log_oracle_diagnostics", config.log_oracle_diagnostics);
    std::size_t max_iters = 0;
    bool has_max_iters = root.find("max_iters") != nullptr;
    root.count("max_iters", max_iters, std::size_t{1});
    if (const Json* t = root.find("tr")) detail::read_tr(*t, config.tr, errors);
    if (const Json* b = root.find("baseline")) detail::read_baseline(*b, config.baseline, errors);
    if (const Json* s = root.find("synthetic")) detail::read_synthetic(*s, config.synthetic, errors);
    if (const Json* d = root.find("dro")) detail::read_dro(*d, config.dro, errors);
    if (has_max_iters && max_iters > 0) {
      config.tr.max_iters = max_iters;
      config.baseline.max_iters = max_iters;
    }
    root.report_unknown();
  }
  config.baseline.method = config.solver == SolverKind::kAsgda        ? baselines::Method::kAsgda
                           : config.solver == SolverKind::kSpdDynamic ? baselines::Method::kSpdDynamic
                                                                      : baselines::Method::kSpdConstant;
  if (!errors.empty()) {
    std::ostringstream os;
    os << "invalid run configuration (" << errors.size() << (errors.size() == 1 ? " error" : " errors") << "):";
    for (const auto& e : errors) os << "\n  " << e;
    throw ConfigError(os.str());
  }
  return config;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_run_config(doc);
}

/// Output directory: explicit setting, else $SMDD_TR_OUTPUT_ROOT/<problem>_<solver>,
/// else runs/<problem>_<solver>.
inline std::string resolve_output_dir(const RunConfig& config) {
  if (!config.output_dir.empty()) return config.output_dir;
  const char* root = std::getenv("SMDD_TR_OUTPUT_ROOT");
  const std::string base = root && *root ? root : "runs";
  return base + "/" + to_string(config.problem) + "_" + to_string(config.solver);
}

}  // namespace smdd::cli
