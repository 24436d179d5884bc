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

#include "snafu/registry/function_unit.hpp"

#include <algorithm>

#include "snafu/common/error.hpp"

namespace snafu {

std::string_view to_string(RuntimeKind kind) {
  switch (kind) {
    case RuntimeKind::native:
      return "native";
    case RuntimeKind::external_shared:
      return "external-shared";
    case RuntimeKind::external_nonshared:
      return "external-nonshared";
  }
  return "native";
}

std::optional<RuntimeKind> parse_runtime(std::string_view text) {
  if (text == "native") return RuntimeKind::native;
  if (text == "external-shared") return RuntimeKind::external_shared;
  if (text == "external-nonshared") return RuntimeKind::external_nonshared;
  return std::nullopt;
}

std::string FunctionUnit::handler_file() const {
  const auto dot = handler.find('.');
  return dot == std::string::npos ? handler : handler.substr(0, dot);
}

std::string FunctionUnit::handler_function() const {
  const auto dot = handler.find('.');
  return dot == std::string::npos ? std::string{} : handler.substr(dot + 1);
}

std::optional<std::string> validate(const FunctionUnit& unit) {
  if (unit.name.empty()) return "function name is empty";
  if (unit.name.find('/') != std::string::npos) return "function name contains '/'";
  if (std::count(unit.handler.begin(), unit.handler.end(), '.') != 1) {
    return "handler '" + unit.handler + "' must contain exactly one '.'";
  }
  if (unit.handler.front() == '.' || unit.handler.back() == '.') {
    return "handler '" + unit.handler + "' has an empty file or function part";
  }
  if (unit.config.timeout_ms <= 0) return "timeout must be positive";
  if (unit.tenant.empty()) return "tenant is empty";
  return std::nullopt;
}

FunctionUnit unit_from_config_json(const nlohmann::json& config) {
  if (!config.is_object()) throw ConfigError("config is not a JSON object");
  auto required_string = [&](const char* key) -> std::string {
    const auto it = config.find(key);
    if (it == config.end() || !it->is_string()) {
      throw ConfigError(std::string("missing or non-string \"") + key + "\"");
    }
    return it->get<std::string>();
  };

  FunctionUnit unit;
  unit.name = required_string("FunctionName");
  unit.handler = required_string("Handler");

  const std::string runtime = config.value("Runtime", std::string{"native"});
  const auto kind = parse_runtime(runtime);
  if (!kind) throw ConfigError("unknown Runtime \"" + runtime + "\"");
  unit.runtime = *kind;

  if (const auto it = config.find("Timeout"); it != config.end()) {
    if (!it->is_number_integer()) throw ConfigError("\"Timeout\" must be an integer (seconds)");
    unit.config.timeout_ms = it->get<std::int64_t>() * 1000;
  }
  if (const auto it = config.find("MemorySize"); it != config.end() && it->is_number_integer()) {
    unit.config.memory_hint_mb = it->get<std::int64_t>();
  }
  if (const auto it = config.find("Environment"); it != config.end() && !it->is_null()) {
    // Accept both the flat map and Lambda's {"Variables": {...}} wrapper.
    const nlohmann::json* vars = &*it;
    if (it->is_object() && it->size() == 1 && it->contains("Variables")) vars = &(*it)["Variables"];
    if (!vars->is_object()) throw ConfigError("\"Environment\" must be an object");
    for (const auto& [k, v] : vars->items()) {
      if (!v.is_string()) throw ConfigError("environment value for \"" + k + "\" is not a string");
      unit.config.environment[k] = v.get<std::string>();
    }
  }
  return unit;
}

nlohmann::json config_json_of(const FunctionUnit& unit) {
  nlohmann::json env = nlohmann::json::object();
  for (const auto& [k, v] : unit.config.environment) env[k] = v;
  return {
      {"FunctionName", unit.name},
      {"Handler", unit.handler},
      {"Runtime", std::string(to_string(unit.runtime))},
      {"Timeout", unit.config.timeout_ms / 1000},
      {"Environment", env},
      {"MemorySize", unit.config.memory_hint_mb},
  };
}

}  // namespace snafu
