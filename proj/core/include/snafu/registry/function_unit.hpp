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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace snafu {

inline constexpr std::string_view kDefaultTenant = "default";

enum class RuntimeKind { native, external_shared, external_nonshared };

std::string_view to_string(RuntimeKind kind);
std::optional<RuntimeKind> parse_runtime(std::string_view text);

struct FunctionConfig {
  std::int64_t timeout_ms = 60000;
  std::map<std::string, std::string> environment;
  // Informational only; nothing enforces it.
  std::int64_t memory_hint_mb = 128;

  friend bool operator==(const FunctionConfig&, const FunctionConfig&) = default;
};

// A deployable function. `handler` is "file.function": the file half names
// the source file stem inside the unit's directory, the function half the
// exported entry point.
struct FunctionUnit {
  std::string name;
  std::string handler;
  RuntimeKind runtime = RuntimeKind::native;
  std::filesystem::path source;
  FunctionConfig config;
  std::string tenant{kDefaultTenant};
  // Assigned by the registry on every successful registration.
  std::uint64_t version = 0;

  std::string handler_file() const;
  std::string handler_function() const;

  friend bool operator==(const FunctionUnit&, const FunctionUnit&) = default;
};

// Reason the unit breaks an invariant, or nullopt when it is valid.
std::optional<std::string> validate(const FunctionUnit& unit);

// config.json <-> FunctionUnit. Keys: FunctionName, Handler, Runtime,
// Timeout (seconds), Environment, optional MemorySize.
// Throws ConfigError on missing or mistyped keys.
FunctionUnit unit_from_config_json(const nlohmann::json& config);
nlohmann::json config_json_of(const FunctionUnit& unit);

}  // namespace snafu
