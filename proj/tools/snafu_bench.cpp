// Copyright 2026 The faas-host Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "snafu/bench/economics.hpp"
#include "snafu/bench/harness.hpp"
#include "snafu/control/control_plane.hpp"

namespace fs = std::filesystem;

namespace {

snafu::HostSpec host_spec(const std::string& work_dir) {
  snafu::HostSpec spec;
  spec.control_executable = snafu::sibling_executable("snafu-control");
  spec.worker_executable = snafu::sibling_executable("snafu-stub-worker");
  spec.work_dir = work_dir.empty() ? fs::temp_directory_path() / "snafu-bench" : fs::path(work_dir);
  fs::create_directories(spec.work_dir);
  snafu::prepare_work_dir(spec);
  return spec;
}

int sweep(const snafu::HostSpec& spec, int fib_n, int reps, const std::string& csv) {
  auto results = snafu::config_sweep(spec, fib_n, reps, snafu::default_sweep_configs(),
                                     [](const std::string& line) { std::fprintf(stderr, "%s\n", line.c_str()); });
  std::cout << snafu::format_sweep_summary(results);
  if (!csv.empty()) snafu::write_sweep_csv(csv, results);
  const auto problems = snafu::check_ordering(results);
  if (problems.empty()) {
    std::cout << "ordering: ok\n";
    return 0;
  }
  for (const auto& p : problems) std::cout << "ordering: " << p << "\n";
  return 1;
}

int reaper(const snafu::HostSpec& spec, int clients, const std::string& mode, const std::string& csv) {
  std::vector<snafu::ReaperReport> reports;
  for (const bool on : {false, true}) {
    if ((mode == "with" && !on) || (mode == "without" && on)) continue;
    snafu::ReaperExperimentOptions options;
    options.clients = clients;
    options.reaper = on;
    if (!csv.empty() && mode != "both") options.csv = csv;
    reports.push_back(snafu::reaper_experiment(spec, options));
    std::fprintf(stderr, "connection samples: %s\n", reports.back().csv.c_str());
  }
  std::cout << snafu::format_reaper_summary(reports);
  for (const auto& r : reports) {
    if (r.readers_ok != r.readers || r.send_failures != 0) return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"snafu-bench: throughput, reaper and economics measurements"};
  app.require_subcommand(1);
  std::string work_dir;
  app.add_option("--work-dir", work_dir, "scratch directory (default: <tmp>/snafu-bench)");

  int fib_n = 15;
  int reps = 5;
  std::string sweep_csv;
  auto* sweep_cmd = app.add_subcommand("sweep", "calls per second across the executor configurations");
  sweep_cmd->add_option("--fib", fib_n, "fib argument")->check(CLI::Range(1, 30));
  sweep_cmd->add_option("--reps", reps, "clean-restart repetitions")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--csv", sweep_csv, "write config_label,fib_n,rep,cps rows here");

  int clients = 100;
  std::string mode = "both";
  std::string reaper_csv;
  auto* reaper_cmd = app.add_subcommand("reaper", "slow-reader clients with and without the reaper");
  reaper_cmd->add_option("--clients", clients, "number of clients")->check(CLI::PositiveNumber);
  reaper_cmd->add_option("--mode", mode, "with|without|both")->check(CLI::IsMember({"with", "without", "both"}));
  reaper_cmd->add_option("--csv", reaper_csv, "connection samples CSV (single mode only)");

  std::string input;
  auto* econ_cmd = app.add_subcommand("econ", "cost per month and utility from a prices file");
  econ_cmd->add_option("--input", input, "prices JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*econ_cmd) {
      std::cout << snafu::format_economics(snafu::load_prices(input));
      return 0;
    }
    const auto spec = host_spec(work_dir);
    if (*sweep_cmd) return sweep(spec, fib_n, reps, sweep_csv);
    return reaper(spec, clients, mode, reaper_csv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "snafu-bench: %s\n", e.what());
    return 2;
  }
}
