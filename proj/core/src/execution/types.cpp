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

#include "snafu/execution/types.hpp"

#include <cstdio>

#include "snafu/common/error.hpp"

namespace snafu {

std::string ExecutorConfig::label() const {
  std::string out;
  switch (kind) {
    case RuntimeKind::native:
      out = isolation ? "IIP" : "IP";
      break;
    case RuntimeKind::external_shared:
      out = isolation ? "EXT-NONSHARED" : "EXT-SHARED";
      break;
    case RuntimeKind::external_nonshared:
      out = "EXT-NONSHARED";
      break;
  }
  if (authentication) out += "+AWS4";
  if (debug_output) out += "+O";
  if (logging) out += "+L";
  return out;
}

std::optional<ExecutorConfig> parse_executor_flag(std::string_view flag) {
  ExecutorConfig cfg;
  if (flag == "native") return cfg;
  if (flag == "native-isolated") {
    cfg.isolation = true;
    return cfg;
  }
  if (flag == "external-shared") {
    cfg.kind = RuntimeKind::external_shared;
    return cfg;
  }
  if (flag == "external-nonshared") {
    cfg.kind = RuntimeKind::external_nonshared;
    return cfg;
  }
  return std::nullopt;
}

nlohmann::json InvocationContext::to_json() const {
  return {{"request_id", request_id},           {"function_name", function_name},
          {"tenant", tenant},                   {"remaining_time_ms", remaining_time_ms},
          {"invoke_endpoint", invoke_endpoint}, {"depth", depth}};
}

InvocationContext InvocationContext::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ProtocolError("context is not an object");
  try {
    InvocationContext ctx;
    ctx.request_id = j.at("request_id").get<std::string>();
    ctx.function_name = j.at("function_name").get<std::string>();
    ctx.tenant = j.value("tenant", std::string(kDefaultTenant));
    ctx.remaining_time_ms = j.value("remaining_time_ms", std::int64_t{60000});
    ctx.invoke_endpoint = j.value("invoke_endpoint", std::string(kLocalEndpoint));
    ctx.depth = j.value("depth", 0);
    return ctx;
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("bad context: ") + e.what());
  }
}

std::string_view to_string(InvocationStatus status) {
  switch (status) {
    case InvocationStatus::ok:
      return "ok";
    case InvocationStatus::function_error:
      return "function-error";
    case InvocationStatus::timeout:
      return "timeout";
  }
  return "ok";
}

InvocationResult InvocationResult::success(nlohmann::json value, double duration_ms) {
  InvocationResult r;
  r.status = InvocationStatus::ok;
  r.value = std::move(value);
  r.duration_ms = duration_ms;
  return r;
}

InvocationResult InvocationResult::failure(std::string message, double duration_ms,
                                           std::string type) {
  InvocationResult r;
  r.status = InvocationStatus::function_error;
  r.error_message = message.empty() ? std::string("unknown error") : std::move(message);
  r.error_type = std::move(type);
  r.duration_ms = duration_ms;
  return r;
}

InvocationResult InvocationResult::timed_out(std::int64_t timeout_ms, double duration_ms) {
  InvocationResult r;
  r.status = InvocationStatus::timeout;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "Task timed out after %.2f seconds",
                static_cast<double>(timeout_ms) / 1000.0);
  r.error_message = buf;
  r.error_type = "Timeout";
  r.duration_ms = duration_ms;
  return r;
}

}  // namespace snafu
