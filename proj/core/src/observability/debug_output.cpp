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

#include "snafu/observability/debug_output.hpp"

#include <chrono>
#include <cstdio>

#include "snafu/common/time.hpp"

namespace snafu {

std::string format_debug_line(std::string_view stage, std::string_view detail) {
  std::string line;
  line.reserve(stage.size() + detail.size() + 32);
  line.push_back('[');
  line += iso8601_millis(std::chrono::system_clock::now());
  line += "] ";
  line += stage;
  line += ": ";
  line += detail;
  return line;
}

DebugOutput::DebugOutput(bool enabled, Sink sink) : enabled_(enabled), sink_(std::move(sink)) {}

void DebugOutput::emit(std::string_view stage, std::string_view detail) {
  if (!enabled_) return;
  const std::string line = format_debug_line(stage, detail);
  std::lock_guard lock(mutex_);
  if (sink_) {
    sink_(line);
    return;
  }
  std::fwrite(line.data(), 1, line.size(), stdout);
  std::fputc('\n', stdout);
  std::fflush(stdout);
}

}  // namespace snafu
