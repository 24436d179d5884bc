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

#include <pthread.h>
#include <unistd.h>

#include <csignal>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "snafu/common/error.hpp"
#include "snafu/control/control_plane.hpp"
#include "snafu/control/instance_config.hpp"
#include "snafu/triggers/triggers.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  snafu::InstanceArgs parsed;
  try {
    parsed = snafu::parse_instance_args(args);
  } catch (const snafu::ConfigError& e) {
    std::fprintf(stderr, "snafu-control: %s\n", e.what());
    return 2;
  }
  if (parsed.help) {
    std::fputs(parsed.help_text.c_str(), stdout);
    return 0;
  }
  if (auto problem = parsed.config.problem()) {
    std::fprintf(stderr, "snafu-control: %s\n", problem->c_str());
    return 2;
  }
  const bool repl = parsed.config.repl;
  spdlog::set_default_logger(spdlog::stderr_color_mt("snafu"));

  // Worker threads inherit the mask; only sigwait below sees these.
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  if (!repl) pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

  snafu::ControlPlane control(parsed.config);
  try {
    control.start();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "snafu-control: %s\n", e.what());
    return 1;
  }
  if (parsed.config.announce) {
    std::printf("%s %d\n", snafu::kListeningBanner, control.port());
    std::fflush(stdout);
  } else {
    std::fprintf(stderr, "snafu-control: listening on %s\n", control.url().c_str());
  }

  if (repl) {
    snafu::ReplBackend backend;
    backend.invoke = [&](const std::string& function, const nlohmann::json& event) {
      return control.dispatch(function, event);
    };
    backend.list = [&] { return control.registry().list(snafu::kDefaultTenant); };
    const int status = snafu::run_repl(std::cin, std::cout, backend, isatty(STDIN_FILENO) != 0);
    control.stop();
    return status;
  }

  int signal = 0;
  sigwait(&stop_signals, &signal);
  control.stop();
  return 0;
}
