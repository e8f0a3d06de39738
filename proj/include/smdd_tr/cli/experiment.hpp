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

// Experiment driver: one run per seed on a small worker pool, a CSV per run
// and a summary.json per invocation; plus cross-seed aggregation of run CSVs.

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <thread>
#include <vector>

#include "smdd_tr/baselines.hpp"
#include "smdd_tr/cli/config.hpp"
#include "smdd_tr/cli/records.hpp"
#include "smdd_tr/problems/credit_data.hpp"
#include "smdd_tr/problems/dro.hpp"
#include "smdd_tr/problems/synthetic.hpp"
#include "smdd_tr/tr.hpp"

namespace smdd::cli {

/// Stream for the starting point, kept apart from the per-iteration streams.
inline constexpr std::uint64_t kStartStream = 0x5eed'57a7'0000'0001ULL;

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::string csv_path;
  std::string error;  // empty on success
  bool diverged = false;
  std::optional<std::size_t> diverged_at;
  std::size_t iterations = 0;
  std::string stop_reason;
  Vector x0;
  Vector final_x;
  double initial_true_phi = std::nan("");
  double initial_true_grad_norm = std::nan("");
  double final_true_phi = std::nan("");
  double final_true_grad_norm = std::nan("");
  double final_surrogate_grad_norm = std::nan("");
  double wall_time_s = 0.0;

  bool ok() const { return error.empty(); }
};

struct RunReport {
  std::string output_dir;
  std::string summary_path;
  std::vector<SeedOutcome> outcomes;

  bool all_ok() const {
    return std::all_of(outcomes.begin(), outcomes.end(), [](const SeedOutcome& o) { return o.ok(); });
  }
};

/// The problem instance shared read-only by every seed.
struct Setup {
  Benchmark bench;
  std::size_t dimension = 0;
  double x0_center = 0.0;
  double x0_radius = 0.0;
  std::string data_note;
};

inline Setup build_setup(const RunConfig& config) {
  Setup setup;
  if (config.problem == ProblemKind::kSynthetic) {
    problems::SyntheticProblem p;
    p.noise_sigma = config.synthetic.noise_sigma;
    p.box_half_width = config.synthetic.box_half_width;
    setup.bench = problems::synthetic_benchmark(p);
    setup.dimension = 1;
    setup.x0_center = config.synthetic.x0_center;
    setup.x0_radius = config.synthetic.x0_radius;
    return setup;
  }
  const DroSettings& s = config.dro;
  problems::DROProblem p;
  if (s.dataset.empty()) {
    p = problems::generate_synthetic_credit(s.rows, s.n_features, s.data_seed);
    setup.data_note = "synthetic credit data, seed " + std::to_string(s.data_seed);
  } else {
    problems::CsvOptions options;
    options.label_column = s.label_column;
    options.feature_columns = s.features;
    options.max_rows = s.rows;
    options.subsample_seed = s.subsample_seed;
    problems::LoadReport report;
    p = problems::load_credit_csv(s.dataset, options, &report);
    setup.data_note = s.dataset + ": kept " + std::to_string(report.rows_kept) + " of " +
                      std::to_string(report.rows_read) + " rows";
  }
  p.shift_scale = s.shift_scale;
  p.lambda1 = s.lambda1;
  p.lambda2 = s.lambda2;
  p.alpha = s.alpha;
  p.feature_noise = s.feature_noise;
  setup.bench = problems::dro_benchmark(p, s.diagnostic_samples);
  setup.dimension = p.n();
  setup.x0_center = s.x0_center;
  setup.x0_radius = s.x0_radius;
  return setup;
}

/// Starting point for `seed`: uniform in B(center * 1, radius). TR and the
/// baselines get the same x0 for the same seed.
inline Vector starting_point(const Setup& setup, std::uint64_t seed) {
  Rng rng = Rng(seed).split(kStartStream);
  const Vector center = Vector::Constant(static_cast<Eigen::Index>(setup.dimension), setup.x0_center);
  return uniform_ball_sample(center, setup.x0_radius, 1, rng).col(0);
}

inline Vector baseline_y0(const RunConfig& config, const Setup& setup, std::uint64_t seed) {
  if (config.problem == ProblemKind::kDro) return setup.bench.problem.inner_domain.center();
  Rng rng = Rng(seed).split(kStartStream).split(1);
  return uniform_ball_sample(Vector::Constant(1, config.synthetic.y0_center), config.synthetic.y0_radius, 1, rng)
      .col(0);
}

inline std::string csv_name(const RunConfig& config, std::uint64_t seed) {
  return std::string(to_string(config.solver)) + "_seed" + std::to_string(seed) + ".csv";
}

inline SeedOutcome run_seed(const RunConfig& config, const Setup& setup, std::uint64_t seed,
                            const std::filesystem::path& dir) {
  SeedOutcome out;
  out.seed = seed;
  out.csv_path = (dir / csv_name(config, seed)).string();
  const auto start = std::chrono::steady_clock::now();
  try {
    out.x0 = starting_point(setup, seed);
    tr::DiagnosticsFn diagnostics;
    if (config.log_oracle_diagnostics) diagnostics = setup.bench.diagnostics;
    if (config.solver == SolverKind::kTr) {
      tr::TRConfig tc = config.tr;
      tc.seed = seed;
      const tr::SolveResult result = tr::solve(out.x0, setup.bench.problem, setup.bench.oracle, tc, diagnostics);
      write_csv(out.csv_path, result.state.history, [](const tr::IterationRecord& r) { return csv_row(r); });
      out.iterations = result.state.history.size();
      out.stop_reason = tr::to_string(result.stop_reason);
      out.final_x = result.state.x;
      out.initial_true_phi = result.initial.phi;
      out.initial_true_grad_norm = result.initial.grad_norm;
      if (!result.state.history.empty()) {
        const auto& last = result.state.history.back();
        out.final_true_phi = last.true_phi;
        out.final_true_grad_norm = last.true_grad_norm;
        out.final_surrogate_grad_norm = last.grad_norm_surrogate;
      } else {
        out.final_true_phi = result.initial.phi;
        out.final_true_grad_norm = result.initial.grad_norm;
      }
      out.diverged = !result.state.x.allFinite();
    } else {
      baselines::BaselineConfig bc = config.baseline;
      bc.seed = seed;
      const Vector y0 = baseline_y0(config, setup, seed);
      if (diagnostics) {
        Rng rng = Rng(seed).split(kStartStream).split(2);
        const PrimalDiagnostics d0 = diagnostics(out.x0, rng);
        out.initial_true_phi = d0.phi;
        out.initial_true_grad_norm = d0.grad_norm;
      }
      const baselines::BaselineResult result =
          baselines::run_baseline(out.x0, y0, setup.bench.problem, setup.bench.oracle, bc, diagnostics);
      const std::size_t batch = bc.batch;
      write_csv(out.csv_path, result.history,
                [batch](const baselines::BaselineRecord& r) { return csv_row(r, batch); });
      out.iterations = result.history.size();
      out.final_x = result.state.x;
      out.diverged = result.state.diverged;
      if (out.diverged) out.diverged_at = result.diverged_at;
      out.stop_reason = out.diverged ? "diverged" : "max_iterations";
      if (!result.history.empty()) {
        const auto& last = result.history.back();
        out.final_true_phi = last.true_phi;
        out.final_true_grad_norm = last.true_grad_norm;
        out.final_surrogate_grad_norm = last.grad_norm;
      }
    }
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  out.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

namespace detail {

inline Json vector_json(const Vector& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

inline Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace detail

inline Json summary_json(const RunConfig& config, const Setup& setup, const RunReport& report) {
  Json runs = Json::array();
  for (const SeedOutcome& o : report.outcomes) {
    Json r;
    r["seed"] = o.seed;
    r["csv"] = std::filesystem::path(o.csv_path).filename().string();
    r["error"] = o.ok() ? Json(nullptr) : Json(o.error);
    r["iterations"] = o.iterations;
    r["stop_reason"] = o.stop_reason;
    r["x0"] = detail::vector_json(o.x0);
    r["final_x"] = detail::vector_json(o.final_x);
    r["initial_true_phi"] = detail::finite_or_null(o.initial_true_phi);
    r["initial_true_grad_norm"] = detail::finite_or_null(o.initial_true_grad_norm);
    r["final_true_phi"] = detail::finite_or_null(o.final_true_phi);
    r["final_true_grad_norm"] = detail::finite_or_null(o.final_true_grad_norm);
    r["final_surrogate_grad_norm"] = detail::finite_or_null(o.final_surrogate_grad_norm);
    r["diverged"] = o.diverged;
    r["diverged_at"] = o.diverged_at ? Json(*o.diverged_at) : Json(nullptr);
    r["wall_time_s"] = o.wall_time_s;
    runs.push_back(std::move(r));
  }
  Json doc;
  doc["problem"] = to_string(config.problem);
  doc["solver"] = to_string(config.solver);
  doc["oracle_diagnostics"] = config.log_oracle_diagnostics;
  if (config.problem == ProblemKind::kDro) {
    doc["data"] = setup.data_note;
    doc["diagnostic_samples"] = config.dro.diagnostic_samples;
  }
  doc["runs"] = std::move(runs);
  return doc;
}

/// Executes every seed and writes the CSVs and summary.json. Per-seed failures
/// are recorded in the outcome and do not stop other seeds.
inline RunReport run_experiment(const RunConfig& config) {
  if (config.seeds.empty()) throw ConfigError("seeds: must be nonempty");
  if (config.is_baseline()) {
    config.baseline.validate();
  } else {
    config.tr.validate();
  }
  const Setup setup = build_setup(config);

  RunReport report;
  report.output_dir = resolve_output_dir(config);
  const std::filesystem::path dir(report.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw ConfigError("output_dir: cannot create '" + report.output_dir + "'");
  }

  report.outcomes.resize(config.seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < config.seeds.size(); i = next++) {
      report.outcomes[i] = run_seed(config, setup, config.seeds[i], dir);
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(config.workers, 1, config.seeds.size());
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  report.summary_path = (dir / "summary.json").string();
  std::ofstream out(report.summary_path);
  if (!out) throw Error("cannot write '" + report.summary_path + "'");
  out << summary_json(config, setup, report).dump(2) << '\n';
  return report;
}

// ---------------------------------------------------------------------------
// summarize

struct SummaryRow {
  std::string solver;
  std::size_t k = 0;
  std::size_t runs = 0;
  std::string metric;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

/// Linear-interpolation quantile of a sorted sample.
inline double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::nan("");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

namespace detail {

struct RunSeries {
  bool oracle = false;
  std::vector<double> values;  // indexed by k
};

inline RunSeries load_series(const std::string& path) {
  const CsvTable table = read_csv(path);
  if (table.index.size() != kColumns.size()) {
    throw SchemaError(path + ": expected " + std::to_string(kColumns.size()) + " columns, found " +
                      std::to_string(table.index.size()));
  }
  for (std::size_t i = 0; i < kColumns.size(); ++i) {
    if (table.column(kColumns[i]) != i) throw SchemaError(path + ": column '" + std::string(kColumns[i]) + "' out of order");
  }
  const std::size_t k_col = table.column("k");
  const std::size_t true_col = table.column("true_grad_norm");
  const std::size_t sur_col = table.column("grad_norm_surrogate");
  RunSeries series;
  series.oracle = !table.rows.empty();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (table.number(r, k_col) != static_cast<double>(r)) {
      throw SchemaError(path + ": row " + std::to_string(r + 2) + ": expected k = " + std::to_string(r));
    }
    if (!std::isfinite(table.number(r, true_col))) series.oracle = false;
  }
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    series.values.push_back(table.number(r, series.oracle ? true_col : sur_col));
  }
  return series;
}

}  // namespace detail

/// Aggregates `<solver>_seed<N>.csv` files found in the given directories.
inline std::vector<SummaryRow> summarize(const std::vector<std::string>& dirs) {
  static const std::regex kRunFile(R"((.+)_seed(\d+)\.csv)");
  std::map<std::string, std::vector<detail::RunSeries>> by_solver;
  if (dirs.empty()) throw ConfigError("summarize: no directories given");
  for (const auto& d : dirs) {
    if (!std::filesystem::is_directory(d)) throw ConfigError("summarize: '" + d + "' is not a directory");
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(d)) {
      std::smatch m;
      const std::string name = entry.path().filename().string();
      if (entry.is_regular_file() && std::regex_match(name, m, kRunFile)) files.push_back(entry.path());
    }
    if (files.empty()) throw ConfigError("summarize: no run CSVs in '" + d + "'");
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const std::string name = f.filename().string();
      std::smatch m;
      std::regex_match(name, m, kRunFile);
      by_solver[m[1].str()].push_back(detail::load_series(f.string()));
    }
  }

  std::vector<SummaryRow> rows;
  for (const auto& [solver, runs] : by_solver) {
    std::size_t longest = 0;
    for (const auto& r : runs) longest = std::max(longest, r.values.size());
    for (std::size_t k = 0; k < longest; ++k) {
      std::vector<double> values;
      bool oracle = true;
      for (const auto& r : runs) {
        if (k < r.values.size()) {
          values.push_back(r.values[k]);
          oracle = oracle && r.oracle;
        }
      }
      std::sort(values.begin(), values.end());
      SummaryRow row;
      row.solver = solver;
      row.k = k;
      row.runs = values.size();
      row.metric = oracle ? "true_grad_norm" : "grad_norm_surrogate";
      row.median = quantile(values, 0.5);
      row.q1 = quantile(values, 0.25);
      row.q3 = quantile(values, 0.75);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

inline void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "solver,k,runs,metric,median,q1,q3\n";
  for (const auto& r : rows) {
    out << r.solver << ',' << r.k << ',' << r.runs << ',' << r.metric << ',' << format_double(r.median) << ','
        << format_double(r.q1) << ',' << format_double(r.q3) << '\n';
  }
}

}  // namespace smdd::cli
