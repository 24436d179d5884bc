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

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>

#include <nlohmann/json.hpp>

#include "snafu/execution/native.hpp"
#include "snafu/execution/types.hpp"
#include "snafu/http/client.hpp"
#include "snafu/observability/debug_output.hpp"
#include "snafu/observability/invocation_log.hpp"
#include "snafu/registry/registry.hpp"

namespace snafu {

namespace worker {
class SharedWorker;
}

// Prepares an outbound invoke for a peer instance, acting as `tenant`
// (authentication headers, signatures).
using OutboundSigner = std::function<void(http::Request& request, const std::string& tenant)>;

// Carries the caller's recursion depth on HTTP invokes.
inline constexpr std::string_view kDepthHeader = "X-Snafu-Depth";

struct InvokerOptions {
  ExecutorConfig executor;
  // `<worker_executable> <source>` runs external units.
  std::string worker_executable;
  // invoke_endpoint of top-level invocations: "local" or a control-plane URL.
  std::string callback_endpoint{kLocalEndpoint};
  int recursion_limit = kDefaultRecursionLimit;
  // Consulted only when the matching executor flag is on.
  std::shared_ptr<InvocationLog> log;
  std::shared_ptr<DebugOutput> debug;
  OutboundSigner sign_outbound;
  const ModuleCatalog* catalog = nullptr;  // builtin catalog when null
};

// The execution stack shared by every trigger: resolves the executor for a
// unit, runs it, emits debug stages and one invocation record per call, and
// routes nested calls in-process or to a peer instance.
class Invoker {
 public:
  Invoker(Registry& registry, InvokerOptions options);
  ~Invoker();
  Invoker(const Invoker&) = delete;
  Invoker& operator=(const Invoker&) = delete;

  // Context for a top-level call of `unit`. A fresh request id is generated
  // when `request_id` is empty.
  InvocationContext make_context(const FunctionUnit& unit, std::string request_id = {},
                                 int depth = 0) const;

  // Debug stages, execution, and the invocation record.
  InvocationResult invoke(const FunctionUnit& unit, const nlohmann::json& event,
                          const InvocationContext& ctx);

  // Execution only: no record, no debug stages.
  InvocationResult execute(const FunctionUnit& unit, const nlohmann::json& event,
                           const InvocationContext& ctx);

  // A call made by function code. "local" endpoints run through invoke();
  // URLs get a control-plane invoke. `pool` supplies HTTP connections.
  InvocationResult dispatch_recursive_call(const InvocationContext& ctx, std::string_view target,
                                           const nlohmann::json& event,
                                           http::ConnectionPool* pool = nullptr);

  // Restores the unit's module-level state to its initial values. Calls in
  // flight keep the state they started with.
  void reset_isolation_state(const FunctionUnit& unit);

  RuntimeKind effective_kind(const FunctionUnit& unit) const;
  std::string executor_label(const FunctionUnit& unit) const;

  // Appends a record when logging is on (also used for forwarded calls).
  void record(const InvocationRecord& record);

  std::uint64_t executed_count() const { return executed_; }
  // Worker processes started so far, across all external units.
  std::size_t worker_spawns() const;

  const InvokerOptions& options() const { return options_; }
  Registry& registry() { return registry_; }

  // Stops every shared worker.
  void shutdown();

 private:
  struct ModuleInstance;
  struct NativeSlot;
  using Key = std::pair<std::string, std::string>;

  InvocationResult execute_native(const FunctionUnit& unit, const nlohmann::json& event,
                                  const InvocationContext& ctx);
  InvocationResult execute_external(const FunctionUnit& unit, RuntimeKind kind,
                                    const nlohmann::json& event, const InvocationContext& ctx);
  InvocationResult dispatch_remote(const InvocationContext& ctx, std::string_view target,
                                   const nlohmann::json& event, http::ConnectionPool& pool);
  std::shared_ptr<ModuleInstance> instance_for(const FunctionUnit& unit, std::string* error);
  std::shared_ptr<worker::SharedWorker> shared_worker_for(const FunctionUnit& unit);
  bool debug_on() const { return options_.executor.debug_output && options_.debug; }

  Registry& registry_;
  InvokerOptions options_;
  const ModuleCatalog& catalog_;
  http::ConnectionPool pool_;

  std::mutex native_mutex_;
  std::map<Key, NativeSlot> native_;

  mutable std::mutex workers_mutex_;
  std::map<Key, std::pair<std::uint64_t, std::shared_ptr<worker::SharedWorker>>> shared_workers_;
  std::size_t retired_spawns_ = 0;
  std::atomic<std::size_t> nonshared_spawns_{0};

  std::atomic<std::uint64_t> executed_{0};
};

}  // namespace snafu
