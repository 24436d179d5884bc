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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "snafu/registry/function_unit.hpp"

namespace snafu {

inline constexpr std::string_view kLocalEndpoint = "local";
inline constexpr int kDefaultRecursionLimit = 4096;

// Executor kind plus the four independent flags of the configuration space:
// O (debug output), L (logging), A (authentication), I (isolation).
struct ExecutorConfig {
  RuntimeKind kind = RuntimeKind::native;
  bool debug_output = false;
  bool logging = false;
  bool authentication = false;
  bool isolation = false;

  // Canonical label, e.g. "IP", "IP+O+L", "IIP+AWS4+O+L", "EXT-SHARED".
  std::string label() const;

  friend bool operator==(const ExecutorConfig&, const ExecutorConfig&) = default;
};

// --executor values: native, native-isolated, external-shared,
// external-nonshared. Only kind and isolation are set.
std::optional<ExecutorConfig> parse_executor_flag(std::string_view flag);

// Per-call metadata handed to functions.
struct InvocationContext {
  std::string request_id;
  std::string function_name;
  std::string tenant{kDefaultTenant};
  std::int64_t remaining_time_ms = 60000;
  // "local" dispatches nested calls in-process; otherwise an absolute URL.
  std::string invoke_endpoint{kLocalEndpoint};
  int depth = 0;

  nlohmann::json to_json() const;
  // Throws ProtocolError on missing fields.
  static InvocationContext from_json(const nlohmann::json& j);

  friend bool operator==(const InvocationContext&, const InvocationContext&) = default;
};

enum class InvocationStatus { ok, function_error, timeout };

std::string_view to_string(InvocationStatus status);

struct InvocationResult {
  InvocationStatus status = InvocationStatus::ok;
  nlohmann::json value;        // meaningful iff ok
  std::string error_message;   // non-empty iff not ok
  std::string error_type;
  double duration_ms = 0.0;

  bool ok() const { return status == InvocationStatus::ok; }

  static InvocationResult success(nlohmann::json value, double duration_ms = 0.0);
  static InvocationResult failure(std::string message, double duration_ms = 0.0,
                                  std::string type = "FunctionError");
  static InvocationResult timed_out(std::int64_t timeout_ms, double duration_ms);
};

}  // namespace snafu
