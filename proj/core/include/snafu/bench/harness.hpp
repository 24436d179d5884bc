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

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "snafu/auth/accounts.hpp"
#include "snafu/control/tenant_spawner.hpp"
#include "snafu/execution/types.hpp"
#include "snafu/http/client.hpp"

namespace snafu {

// A run whose call count or result disagrees with the oracle.
class BenchInvalid : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HostSpec {
  std::string control_executable;
  std::string worker_executable;
  // Scratch directory holding the functions, accounts and logs.
  std::filesystem::path work_dir;
  std::chrono::milliseconds startup_timeout{10000};

  std::filesystem::path functions_dir() const { return work_dir / "functions"; }
  std::filesystem::path accounts_file() const { return work_dir / "accounts.json"; }
};

// The account bench clients sign with when authentication is on.
Account bench_account();

// Writes the sample functions (fib, fib_delay, counter, helloworld, echo)
// and the accounts file below spec.work_dir.
void prepare_work_dir(const HostSpec& spec);

// fib(n) with fib(1) = fib(2) = 1.
std::int64_t fib_value(std::int64_t n);

// A host started on an ephemeral loopback port.
class HostProcess {
 public:
  // Throws SpawnError.
  HostProcess(const HostSpec& spec, const std::vector<std::string>& args,
              const std::filesystem::path& output_file = {});
  ~HostProcess();
  HostProcess(const HostProcess&) = delete;
  HostProcess& operator=(const HostProcess&) = delete;

  int port() const { return port_; }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  pid_t pid() const { return proc_.pid(); }
  // SIGTERM and wait; the host flushes its log on the way out.
  void stop();

 private:
  Subprocess proc_;
  int port_ = -1;
  std::thread drain_;
};

// Arguments of a benchmark host: every nested call goes back through the
// host's own HTTP endpoint.
std::vector<std::string> bench_host_args(const HostSpec& spec, const ExecutorConfig& executor,
                                         const std::filesystem::path& log_file);

// Control-plane client, signing with bench_account() when `sign` is set.
class BenchClient {
 public:
  BenchClient(const std::string& url, bool sign);
  http::Client::Result invoke(const std::string& function, const nlohmann::json& event);
  nlohmann::json stats();

 private:
  std::string url_;
  bool sign_;
  http::Client client_;
};

struct BenchResult {
  std::string config_label;
  int fib_n = 0;
  int repetitions = 0;
  std::vector<double> cps_values;
  double cps_median = 0.0;
  double cps_mean = 0.0;
  std::int64_t total_calls = 0;
  bool failed = false;
  std::string error;
};

double median(std::vector<double> values);
double mean(const std::vector<double>& values);

// One fresh host per repetition; each invokes fib(fib_n) once and checks
// the value, the executed-call count and (with logging on) the log rows
// against the oracle. Throws BenchInvalid or SpawnError.
BenchResult measure_cps(const HostSpec& spec, const ExecutorConfig& executor, int fib_n, int repetitions);

// The highlighted configurations: IP, IP+O+L, IP+AWS4+O, IIP,
// IIP+AWS4+O+L, EXT-SHARED, EXT-NONSHARED.
std::vector<ExecutorConfig> default_sweep_configs();

using Progress = std::function<void(const std::string& line)>;

// Failing configurations are marked failed and the sweep continues.
std::vector<BenchResult> config_sweep(const HostSpec& spec, int fib_n, int repetitions,
                                      const std::vector<ExecutorConfig>& configs, const Progress& progress = {});

// Broken orderings among the sweep results: the in-process chain
// IP >= IP+O+L >= IP+AWS4+O >= IIP >= IIP+AWS4+O+L by median, each step
// allowing `tie_tolerance`, and EXT-SHARED >= ext_ratio * EXT-NONSHARED.
// Missing or failed configurations are reported too.
std::vector<std::string> check_ordering(const std::vector<BenchResult>& results, double tie_tolerance = 0.05,
                                        double ext_ratio = 2.0);

// Rows "config_label,fib_n,rep,cps".
void write_sweep_csv(const std::filesystem::path& path, const std::vector<BenchResult>& results);
std::string format_sweep_summary(const std::vector<BenchResult>& results);

struct ReaperExperimentOptions {
  int clients = 100;
  bool reaper = true;
  // Clients start evenly spread over this span.
  std::chrono::milliseconds arrival_span{4000};
  // How long a slow reader keeps its socket without reading.
  std::chrono::milliseconds hold{6000};
  // Every k-th client reads its response at once.
  int reader_every = 10;
  std::chrono::milliseconds unread_timeout{1000};
  std::chrono::milliseconds sample_interval{100};
  std::string function{"fib_delay"};
  int fib_n = 1;
  // Connection samples CSV; work_dir/connections-<mode>.csv when empty.
  std::filesystem::path csv;
};

struct ReaperReport {
  bool reaper = false;
  int clients = 0;
  std::size_t peak_open = 0;
  std::uint64_t reaped = 0;
  int readers = 0;
  int readers_ok = 0;
  int send_failures = 0;
  double wall_seconds = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> samples;  // open, unread
  std::filesystem::path csv;
};

// Throws SpawnError or std::runtime_error when the harness itself fails.
ReaperReport reaper_experiment(const HostSpec& spec, const ReaperExperimentOptions& options);

std::string format_reaper_summary(const std::vector<ReaperReport>& reports);

}  // namespace snafu
