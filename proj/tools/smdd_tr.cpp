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

// smdd_tr run <config.json> [--seed-override S] [--max-iters K] [--output-dir D] [--workers W]
// smdd_tr summarize <dir>... [--output FILE]

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "smdd_tr/cli/config.hpp"
#include "smdd_tr/cli/experiment.hpp"

namespace {

int run_command(const std::string& config_path, const std::optional<std::uint64_t>& seed_override,
                const std::optional<std::size_t>& max_iters, const std::string& output_dir,
                const std::optional<std::size_t>& workers) {
  smdd::cli::RunConfig config = smdd::cli::load_run_config(config_path);
  if (seed_override) config.seeds = {*seed_override};
  if (max_iters) {
    config.tr.max_iters = *max_iters;
    config.baseline.max_iters = *max_iters;
  }
  if (!output_dir.empty()) config.output_dir = output_dir;
  if (workers) config.workers = *workers;

  const smdd::cli::RunReport report = smdd::cli::run_experiment(config);
  int failures = 0;
  for (const auto& o : report.outcomes) {
    if (!o.ok()) {
      ++failures;
      std::cerr << "seed " << o.seed << ": error: " << o.error << '\n';
      continue;
    }
    std::cout << "seed " << o.seed << ": " << o.iterations << " iterations, " << o.stop_reason
              << ", final |grad Phi| = " << o.final_true_grad_norm << (o.diverged ? " (diverged)" : "") << ", "
              << o.wall_time_s << " s\n";
  }
  std::cout << "wrote " << report.summary_path << '\n';
  return failures == 0 ? 0 : 1;
}

int summarize_command(const std::vector<std::string>& dirs, const std::string& output) {
  const auto rows = smdd::cli::summarize(dirs);
  if (output.empty()) {
    smdd::cli::write_summary_csv(std::cout, rows);
    return 0;
  }
  std::ofstream out(output);
  if (!out) throw smdd::Error("cannot write '" + output + "'");
  smdd::cli::write_summary_csv(out, rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trust-region solver for stochastic minimax problems with decision-dependent distributions"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run one experiment configuration over its seeds");
  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::size_t> max_iters;
  std::optional<std::size_t> workers;
  std::string output_dir;
  run->add_option("config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
  run->add_option("--seed-override", seed_override, "Run only this seed");
  run->add_option("--max-iters", max_iters, "Override the iteration budget")->check(CLI::PositiveNumber);
  run->add_option("--output-dir", output_dir, "Override the output directory");
  run->add_option("--workers", workers, "Seeds run concurrently")->check(CLI::PositiveNumber);

  auto* summarize = app.add_subcommand("summarize", "Aggregate run CSVs across seeds");
  std::vector<std::string> dirs;
  std::string output;
  summarize->add_option("dirs", dirs, "Run directories")->required();
  summarize->add_option("-o,--output", output, "Write the table here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_command(config_path, seed_override, max_iters, output_dir, workers);
    return summarize_command(dirs, output);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
