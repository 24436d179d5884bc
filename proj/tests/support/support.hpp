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
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "snafu/common/time.hpp"
#include "snafu/http/message.hpp"

namespace snafu::testkit {

std::filesystem::path fixtures_dir();
std::filesystem::path samples_dir();
std::string control_executable();
std::string worker_executable();
std::string cli_executable();
std::filesystem::path plugin_path();

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& child) const { return path_ / child; }

 private:
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

// Polls `pred` until it holds or `timeout` passes.
bool eventually(const std::function<bool()>& pred, std::chrono::milliseconds timeout,
                std::chrono::milliseconds interval = std::chrono::milliseconds(20));

// `<root>/<name>/config.json` plus `<module>.native`.
void write_unit(const std::filesystem::path& root, const std::string& name, const std::string& module,
                const std::string& runtime = "native", int timeout_s = 60);

// Data rows of a CSV file with a header line.
std::size_t csv_rows(const std::filesystem::path& path);

// Reference Fibonacci by direct recursion, counting every call.
struct FibOracle {
  std::int64_t value = 0;
  std::int64_t calls = 0;
};
FibOracle fib_oracle(int n);

// Minute-by-minute cron matcher written from the field grammar alone.
// Days that cannot match are skipped whole.
std::optional<SystemTime> cron_oracle_next(const std::string& expression, SystemTime after,
                                           std::chrono::hours horizon = std::chrono::hours(24 * 366 * 4));
std::string random_cron_expression(std::mt19937_64& rng);
SystemTime random_time(std::mt19937_64& rng, int first_year = 2020, int last_year = 2030);
SystemTime utc(int year, int month, int day, int hour = 0, int minute = 0, int second = 0);

// A request from the AWS SigV4 test suite's ".req" / ".sreq" format.
http::Request parse_suite_request(const std::string& text);

// Signing credentials and clock of the published suite.
inline constexpr const char* kSuiteKey = "AKIDEXAMPLE";
inline constexpr const char* kSuiteSecret = "wJalrXUtnFEMI/K7MDENG+bPxRfiCYEXAMPLEKEY";
inline constexpr const char* kSuiteDate = "20150830T123600Z";

// Case paths without extension, sorted.
std::vector<std::filesystem::path> suite_cases();
// Checks the canonical request, string to sign, authorization and
// verification of one case. Empty when all agree, else what differed.
std::string suite_case_failure(const std::filesystem::path& base);

// A control-plane-shaped request with random method, path, query, custom
// header and binary body, carrying a Host header.
http::Request random_signable_request(std::mt19937_64& rng);

}  // namespace snafu::testkit
