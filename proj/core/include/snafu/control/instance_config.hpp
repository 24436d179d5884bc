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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "snafu/auth/authenticator.hpp"
#include "snafu/execution/types.hpp"
#include "snafu/http/server.hpp"

namespace snafu {

inline constexpr int kDefaultPort = 10000;
inline constexpr const char* kListeningBanner = "SNAFU_LISTENING";
// --callback value naming the instance's own URL.
inline constexpr std::string_view kSelfEndpoint = "self";

struct InstanceConfig {
  int port = kDefaultPort;
  std::string bind_address{"0.0.0.0"};
  ExecutorConfig executor;
  AuthMode auth_mode = AuthMode::none;
  std::filesystem::path log_file{"snafu.csv"};
  std::optional<std::string> forward_target;
  std::string callback_endpoint{kLocalEndpoint};
  bool per_tenant_spawn = false;
  http::ReaperOptions reaper;
  std::filesystem::path functions_dir;
  // Set when the directory came from a flag or the environment; a missing
  // explicit directory is an error, a missing default one is not.
  bool functions_dir_explicit = false;
  std::filesystem::path accounts_file;
  std::string worker_executable;
  // Serve every request as this tenant (per-tenant children).
  std::optional<std::string> tenant;
  // Print "SNAFU_LISTENING <port>" once serving.
  bool announce = false;
  // Read "call/list/quit" commands on standard input while serving.
  bool repl = false;
  std::filesystem::path connection_stats_file;
  std::chrono::milliseconds connection_stats_interval{1000};

  // Reason the configuration is inconsistent, or nullopt.
  std::optional<std::string> problem() const;
};

struct InstanceArgs {
  InstanceConfig config;
  bool help = false;
  std::string help_text;
};

// Flags (see --help) over environment (SNAFU_PORT, SNAFU_FUNCTIONS_DIR,
// SNAFU_ACCOUNTS_FILE, SNAFU_WORKER) over defaults. Throws ConfigError.
InstanceArgs parse_instance_args(const std::vector<std::string>& args);

// "--reaper" value: empty for defaults, else "<unread_ms>,<idle_ms>".
http::ReaperOptions parse_reaper_spec(std::string_view spec);

// --executor value selecting the same kind and isolation.
std::string executor_flag(const ExecutorConfig& executor);

// Arguments for a per-tenant child instance of `config`: same executor
// flags, ephemeral port, no authentication.
std::vector<std::string> tenant_child_args(const InstanceConfig& config, const std::string& tenant);

}  // namespace snafu
