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

// Base data for the DRO benchmark: CSV ingestion and a planted-logistic generator.
//
// CSV schema: comma separated, UTF-8, header row required. One label column
// with values {0, 1} (mapped to {-1, +1}); the feature columns are either an
// explicit include-list or every other named column. Empty cells and "NA"
// count as missing and drop the row. Kept rows are optionally subsampled to
// `max_rows` with a fixed seed and then standardized per column.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "smdd_tr/problems/dro.hpp"
#include "smdd_tr/rng.hpp"

namespace smdd::problems {

class IngestError : public Error {
 public:
  IngestError(const std::string& what, std::size_t line) : Error(what), line_(line) {}
  /// 1-based line number, 0 when not tied to a line.
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct CsvOptions {
  std::string label_column = "SeriousDlqin2yrs";
  /// Empty: every named column other than the label.
  std::vector<std::string> feature_columns;
  /// 0 keeps every row.
  std::size_t max_rows = 200;
  std::uint64_t subsample_seed = 0;
};

struct LoadReport {
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;
  std::size_t rows_kept = 0;
  std::size_t feature_count = 0;
  std::vector<std::string> feature_names;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

inline std::optional<double> parse_number(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

inline bool is_missing(std::string_view cell) { return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan"; }

// Zero mean, unit (population) variance; constant columns are only centred.
inline void standardize_columns(Matrix& features) {
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    auto col = features.col(j);
    col.array() -= col.mean();
    const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(col.size()));
    if (sd > 0.0) col /= sd;
  }
}

}  // namespace detail

inline CreditData parse_credit_csv(std::istream& in, const CsvOptions& options, LoadReport* report = nullptr) {
  LoadReport local;
  LoadReport& rep = report ? *report : local;

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw IngestError("credit csv: empty file (no header row)", 0);
  ++line_no;
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = detail::split_commas(line);
  const std::size_t columns = header.size();

  std::optional<std::size_t> label_index;
  for (std::size_t c = 0; c < columns; ++c) {
    if (header[c] == options.label_column) label_index = c;
  }
  if (!label_index) throw IngestError("credit csv: label column '" + options.label_column + "' not in header", 1);

  std::vector<std::size_t> feature_index;
  if (options.feature_columns.empty()) {
    for (std::size_t c = 0; c < columns; ++c) {
      if (c != *label_index && !header[c].empty()) {
        feature_index.push_back(c);
        rep.feature_names.emplace_back(header[c]);
      }
    }
  } else {
    for (const auto& name : options.feature_columns) {
      const auto it = std::find(header.begin(), header.end(), std::string_view(name));
      if (it == header.end()) throw IngestError("credit csv: feature column '" + name + "' not in header", 1);
      feature_index.push_back(static_cast<std::size_t>(it - header.begin()));
      rep.feature_names.push_back(name);
    }
  }
  if (feature_index.empty()) throw IngestError("credit csv: no feature columns", 1);
  rep.feature_count = feature_index.size();

  std::vector<double> values;
  std::vector<double> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    ++rep.rows_read;
    const auto cells = detail::split_commas(line);
    if (cells.size() != columns) {
      throw IngestError("credit csv: line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                            " cells, header has " + std::to_string(columns),
                        line_no);
    }
    bool missing = detail::is_missing(cells[*label_index]);
    for (const std::size_t c : feature_index) missing = missing || detail::is_missing(cells[c]);
    if (missing) {
      ++rep.rows_dropped;
      rep.warnings.push_back("line " + std::to_string(line_no) + ": missing value, row dropped");
      continue;
    }
    const auto label = detail::parse_number(cells[*label_index]);
    if (!label || (*label != 0.0 && *label != 1.0)) {
      throw IngestError("credit csv: line " + std::to_string(line_no) + ": label must be 0 or 1", line_no);
    }
    labels.push_back(*label == 1.0 ? 1.0 : -1.0);
    for (const std::size_t c : feature_index) {
      const auto v = detail::parse_number(cells[c]);
      if (!v) {
        throw IngestError("credit csv: line " + std::to_string(line_no) + ": non-numeric value '" +
                              std::string(cells[c]) + "' in column '" + std::string(header[c]) + "'",
                          line_no);
      }
      values.push_back(*v);
    }
  }
  if (labels.empty()) throw IngestError("credit csv: zero usable rows", line_no);

  const std::size_t cols = feature_index.size();
  std::vector<std::size_t> keep(labels.size());
  std::iota(keep.begin(), keep.end(), std::size_t{0});
  if (options.max_rows > 0 && keep.size() > options.max_rows) {
    Rng rng(options.subsample_seed);
    // partial Fisher-Yates, then restore file order
    for (std::size_t i = 0; i < options.max_rows; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng() % (keep.size() - i));
      std::swap(keep[i], keep[j]);
    }
    keep.resize(options.max_rows);
    std::sort(keep.begin(), keep.end());
  }

  CreditData data;
  data.features.resize(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(cols));
  data.labels.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    data.labels(row) = labels[keep[r]];
    for (std::size_t c = 0; c < cols; ++c) data.features(row, static_cast<Eigen::Index>(c)) = values[keep[r] * cols + c];
  }
  detail::standardize_columns(data.features);
  rep.rows_kept = keep.size();
  return data;
}

/// Reads the CSV at `path` into a DROProblem with default parameters.
inline DROProblem load_credit_csv(const std::string& path, const CsvOptions& options = {},
                                  LoadReport* report = nullptr) {
  std::ifstream in(path);
  if (!in) throw IngestError("credit csv: cannot open '" + path + "'", 0);
  DROProblem problem;
  problem.data = parse_credit_csv(in, options, report);
  return problem;
}

/// Gaussian features with labels drawn from a planted logistic model
/// P(b = +1 | a) = sigmoid(a^T w*), w* ~ N(0, I) scaled to unit norm times 2.
inline DROProblem generate_synthetic_credit(std::size_t n_rows, std::size_t n_features, std::uint64_t seed) {
  if (n_rows < 2) throw ConfigError("generate_synthetic_credit: need at least 2 rows");
  if (n_features < 1) throw ConfigError("generate_synthetic_credit: need at least 1 feature");
  Rng rng(seed);
  Rng weight_rng = rng.split(0);
  Rng feature_rng = rng.split(1);
  Rng label_rng = rng.split(2);

  Vector planted(static_cast<Eigen::Index>(n_features));
  for (Eigen::Index j = 0; j < planted.size(); ++j) planted(j) = weight_rng.normal();
  planted *= 2.0 / planted.norm();

  DROProblem problem;
  problem.data.features.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_features));
  problem.data.labels.resize(static_cast<Eigen::Index>(n_rows));
  for (Eigen::Index i = 0; i < problem.data.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < problem.data.features.cols(); ++j) problem.data.features(i, j) = feature_rng.normal();
    const double p = detail::sigmoid(problem.data.features.row(i).dot(planted));
    problem.data.labels(i) = label_rng.uniform() < p ? 1.0 : -1.0;
  }
  return problem;
}

}  // namespace smdd::problems
