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

#include "snafu/control/instance_config.hpp"

#include <charconv>
#include <cstdlib>

#include <CLI11.hpp>

#include "snafu/auth/accounts.hpp"
#include "snafu/common/error.hpp"
#include "snafu/http/message.hpp"
#include "snafu/registry/registry.hpp"

namespace snafu {

namespace {

const char* env(const char* name) {
  const char* v = std::getenv(name);
  return v != nullptr && *v != '\0' ? v : nullptr;
}

std::int64_t parse_millis(std::string_view text, std::string_view what) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || v <= 0) {
    throw ConfigError("--reaper " + std::string(what) + " must be a positive integer, got '" +
                      std::string(text) + "'");
  }
  return v;
}

}  // namespace

std::optional<std::string> InstanceConfig::problem() const {
  if (forward_target && per_tenant_spawn) return "--forward and --per-tenant-spawn are mutually exclusive";
  if (forward_target && !http::Endpoint::parse(*forward_target)) {
    return "--forward needs an http:// URL, got '" + *forward_target + "'";
  }
  if (callback_endpoint != kLocalEndpoint && callback_endpoint != kSelfEndpoint &&
      !http::Endpoint::parse(callback_endpoint)) {
    return "--callback needs 'local', 'self' or an http:// URL, got '" + callback_endpoint + "'";
  }
  if (port < 0 || port > 65535) return "--port out of range";
  if (reaper.response_unread_timeout.count() <= 0 || reaper.idle_timeout.count() <= 0) {
    return "reaper timeouts must be positive";
  }
  return std::nullopt;
}

http::ReaperOptions parse_reaper_spec(std::string_view spec) {
  http::ReaperOptions r;
  r.enabled = true;
  if (spec.empty()) return r;
  const auto comma = spec.find(',');
  if (comma == std::string_view::npos) {
    throw ConfigError("--reaper expects <unread_ms>,<idle_ms>, got '" + std::string(spec) + "'");
  }
  r.response_unread_timeout = std::chrono::milliseconds(parse_millis(spec.substr(0, comma), "unread_ms"));
  r.idle_timeout = std::chrono::milliseconds(parse_millis(spec.substr(comma + 1), "idle_ms"));
  return r;
}

std::string executor_flag(const ExecutorConfig& executor) {
  switch (executor.kind) {
    case RuntimeKind::native:
      return executor.isolation ? "native-isolated" : "native";
    case RuntimeKind::external_shared:
      return executor.isolation ? "external-nonshared" : "external-shared";
    case RuntimeKind::external_nonshared:
      return "external-nonshared";
  }
  return "native";
}

InstanceArgs parse_instance_args(const std::vector<std::string>& args) {
  InstanceArgs out;
  InstanceConfig& cfg = out.config;

  // "--reaper" takes an optional attached value, which CLI11 cannot tell
  // apart from a following positional; handle it up front.
  std::vector<std::string> rest;
  std::optional<std::string> reaper_spec;
  for (const auto& a : args) {
    if (a == "--reaper") {
      reaper_spec = "";
    } else if (a.rfind("--reaper=", 0) == 0) {
      reaper_spec = a.substr(9);
    } else {
      rest.push_back(a);
    }
  }

  CLI::App app{"Function-as-a-service host with a Lambda-compatible control plane", "snafu-control"};
  std::optional<int> port;
  std::string executor = "native";
  std::string authenticator = "none";
  std::string logger = "none";
  std::string functions_dir;
  std::string accounts_file;
  std::string forward;
  std::string tenant;
  int stats_interval_ms = 1000;

  app.add_option("-p,--port", port, "listening port (default 10000, env SNAFU_PORT)");
  app.add_option("--bind", cfg.bind_address, "listening address");
  app.add_option("-e,--executor", executor, "native|native-isolated|external-shared|external-nonshared");
  app.add_option("-a,--authenticator", authenticator, "none|accounts|aws4");
  app.add_option("-l,--logger", logger, "none|csv");
  app.add_option("--log-file", cfg.log_file, "CSV invocation log path");
  app.add_flag("-d,--debug", cfg.executor.debug_output, "debug output on standard output");
  app.add_option("--forward", forward, "relay function requests to this instance URL");
  app.add_option("--callback", cfg.callback_endpoint, "invoke endpoint for nested calls: local, self or URL");
  app.add_flag("--per-tenant-spawn", cfg.per_tenant_spawn, "one child instance per tenant");
  app.add_option("--functions-dir", functions_dir, "functions directory (env SNAFU_FUNCTIONS_DIR)");
  app.add_option("--accounts", accounts_file, "accounts file (env SNAFU_ACCOUNTS_FILE)");
  app.add_option("--worker", cfg.worker_executable, "external worker executable (env SNAFU_WORKER)");
  app.add_option("--connection-stats", cfg.connection_stats_file, "CSV file of sampled connection counts");
  app.add_option("--connection-stats-interval", stats_interval_ms, "sampling interval in ms");
  app.add_flag("--repl", cfg.repl, "interactive command loop on standard input");
  app.add_option("--tenant", tenant, "serve every request as this tenant")->group("");
  app.add_flag("--announce", cfg.announce, "print the listening port once serving")->group("");
  app.footer("--reaper[=<unread_ms>,<idle_ms>]  close connections whose responses go unread "
             "(defaults 5000,60000)");

  std::vector<std::string> reversed(rest.rbegin(), rest.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out.help = true;
    out.help_text = app.help();
    return out;
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  if (port) {
    cfg.port = *port;
  } else if (const char* p = env("SNAFU_PORT")) {
    const std::string_view s(p);
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      throw ConfigError("SNAFU_PORT is not a number: " + std::string(s));
    }
    cfg.port = v;
  }

  const auto exec = parse_executor_flag(executor);
  if (!exec) throw ConfigError("unknown executor '" + executor + "'");
  cfg.executor.kind = exec->kind;
  cfg.executor.isolation = exec->isolation;

  const auto mode = parse_auth_mode(authenticator);
  if (!mode) throw ConfigError("unknown authenticator '" + authenticator + "'");
  cfg.auth_mode = *mode;
  cfg.executor.authentication = *mode != AuthMode::none;

  if (logger == "csv") {
    cfg.executor.logging = true;
  } else if (logger != "none") {
    throw ConfigError("unknown logger '" + logger + "'");
  }

  if (!forward.empty()) cfg.forward_target = forward;
  if (!tenant.empty()) cfg.tenant = tenant;
  if (reaper_spec) cfg.reaper = parse_reaper_spec(*reaper_spec);
  if (stats_interval_ms <= 0) throw ConfigError("--connection-stats-interval must be positive");
  cfg.connection_stats_interval = std::chrono::milliseconds(stats_interval_ms);

  cfg.functions_dir_explicit = !functions_dir.empty() || env("SNAFU_FUNCTIONS_DIR") != nullptr;
  cfg.functions_dir = functions_dir.empty() ? default_functions_dir() : std::filesystem::path(functions_dir);
  cfg.accounts_file = accounts_file.empty() ? default_accounts_file() : std::filesystem::path(accounts_file);
  if (cfg.worker_executable.empty()) {
    if (const char* w = env("SNAFU_WORKER")) cfg.worker_executable = w;
  }

  if (auto p = cfg.problem()) throw ConfigError(*p);
  return out;
}

std::vector<std::string> tenant_child_args(const InstanceConfig& config, const std::string& tenant) {
  std::vector<std::string> args{"--port",           "0",
                                "--bind",           "127.0.0.1",
                                "--executor",       executor_flag(config.executor),
                                "--authenticator",  "none",
                                "--tenant",         tenant,
                                "--announce",
                                "--functions-dir",  std::filesystem::absolute(config.functions_dir).string()};
  if (config.executor.debug_output) args.emplace_back("--debug");
  if (config.executor.logging) {
    auto log = std::filesystem::absolute(config.log_file);
    const std::string stem = log.stem().string() + "-" + tenant;
    log.replace_filename(stem + log.extension().string());
    args.insert(args.end(), {"--logger", "csv", "--log-file", log.string()});
  }
  if (!config.worker_executable.empty()) args.insert(args.end(), {"--worker", config.worker_executable});
  if (config.reaper.enabled) {
    args.push_back("--reaper=" + std::to_string(config.reaper.response_unread_timeout.count()) + "," +
                   std::to_string(config.reaper.idle_timeout.count()));
  }
  return args;
}

}  // namespace snafu
