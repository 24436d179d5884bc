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

#include <functional>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>

namespace snafu {

// Debug lines "[<iso-time>] <stage>: <detail>". Disabled output costs one
// branch: callers pass a callable so nothing is formatted unless enabled.
class DebugOutput {
 public:
  using Sink = std::function<void(std::string_view line)>;

  // Writes to standard output when `sink` is empty.
  explicit DebugOutput(bool enabled, Sink sink = {});

  bool enabled() const { return enabled_; }

  void emit(std::string_view stage, std::string_view detail);

  template <class DetailFn>
  void emit_lazy(std::string_view stage, DetailFn&& detail) {
    if (!enabled_) return;
    emit(stage, std::forward<DetailFn>(detail)());
  }

 private:
  bool enabled_;
  Sink sink_;
  std::mutex mutex_;
};

std::string format_debug_line(std::string_view stage, std::string_view detail);

}  // namespace snafu
