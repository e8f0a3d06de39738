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

// Per-iteration CSV log shared by the trust-region solver and the baselines.
//
// Column order is fixed (see kColumns). Floats are written with 17 significant
// digits so that parsing a file gives back the exact doubles; vectors are
// ';'-joined inside one cell. Baseline rows leave trust-region-only columns as
// nan and report the norm of the stochastic x-gradient as grad_norm_surrogate.

#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "smdd_tr/baselines.hpp"
#include "smdd_tr/tr.hpp"

namespace smdd::cli {

class SchemaError : public Error {
 public:
  using Error::Error;
};

inline constexpr std::array<std::string_view, 22> kColumns = {
    "k",           "status",        "accepted",  "x_before",      "x_after",           "delta",
    "delta_next",  "rho",           "grad_norm_surrogate",        "v_k",               "v_k_half",
    "descent_lhs", "descent_rhs",   "n_llr",     "n_value",       "n_value_half",      "b1_frobenius",
    "poisedness",  "true_phi",      "true_grad_norm",             "stepsize",          "y_norm"};

inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  return std::string(buf.data(), result.ptr);
}

inline std::string format_vector(const VectorRef& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ';';
    out += format_double(v(i));
  }
  return out;
}

inline std::string csv_header() {
  std::string out;
  for (std::size_t i = 0; i < kColumns.size(); ++i) {
    if (i > 0) out += ',';
    out += kColumns[i];
  }
  return out;
}

inline std::string csv_row(const tr::IterationRecord& r) {
  std::ostringstream os;
  os << r.k << ',' << tr::to_string(r.status) << ',' << (r.accepted ? 1 : 0) << ',' << format_vector(r.x_before)
     << ',' << format_vector(r.x_after) << ',' << format_double(r.delta) << ',' << format_double(r.delta_next) << ','
     << format_double(r.rho) << ',' << format_double(r.grad_norm_surrogate) << ',' << format_double(r.v_k) << ','
     << format_double(r.v_k_half) << ',' << format_double(r.descent_lhs) << ',' << format_double(r.descent_rhs)
     << ',' << r.n_llr << ',' << r.n_value << ',' << r.n_value_half << ',' << format_double(r.b1_frobenius) << ','
     << format_double(r.poisedness) << ',' << format_double(r.true_phi) << ',' << format_double(r.true_grad_norm)
     << ",nan,nan";
  return os.str();
}

inline std::string csv_row(const baselines::BaselineRecord& r, std::size_t batch) {
  const std::string nan = "nan";
  std::ostringstream os;
  os << r.k << ',' << (r.diverged ? "diverged" : "step") << ",1," << format_vector(r.x_before) << ','
     << format_vector(r.x_after) << ',' << nan << ',' << nan << ',' << nan << ',' << format_double(r.grad_norm)
     << ',' << nan << ',' << nan << ',' << nan << ',' << nan << ",0," << batch << ",0," << nan << ',' << nan << ','
     << format_double(r.true_phi) << ',' << format_double(r.true_grad_norm) << ',' << format_double(r.stepsize)
     << ',' << format_double(r.y_norm);
  return os.str();
}

template <typename Records, typename RowFn>
void write_csv(const std::string& path, const Records& records, RowFn&& row) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << csv_header() << '\n';
  for (const auto& r : records) out << row(r) << '\n';
  if (!out) throw Error("write failed for '" + path + "'");
}

/// A parsed run CSV: column name -> column index, plus the raw cells.
struct CsvTable {
  std::string path;
  std::map<std::string, std::size_t, std::less<>> index;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const {
    const auto it = index.find(name);
    if (it == index.end()) throw SchemaError(path + ": missing column '" + std::string(name) + "'");
    return it->second;
  }

  double number(std::size_t row, std::size_t col) const {
    const std::string& cell = rows[row][col];
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
      throw SchemaError(path + ": row " + std::to_string(row + 2) + ": '" + cell + "' is not a number");
    }
    return v;
  }
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open '" + path + "'");
  CsvTable table;
  table.path = path;
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(path + ": empty file");
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream is(s);
    while (std::getline(is, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  const auto header = split(line);
  for (std::size_t i = 0; i < header.size(); ++i) table.index.emplace(header[i], i);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != header.size()) {
      throw SchemaError(path + ": line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                        " cells, header has " + std::to_string(header.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

}  // namespace smdd::cli
