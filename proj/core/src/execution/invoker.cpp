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

#include "snafu/execution/invoker.hpp"

#include <chrono>
#include <exception>

#include <fmt/format.h>

#include "snafu/common/error.hpp"
#include "snafu/common/ids.hpp"
#include "snafu/common/time.hpp"
#include "snafu/worker/worker.hpp"

namespace snafu {

struct Invoker::ModuleInstance {
  ModulePtr module;
  std::unique_ptr<ModuleState> state;
  http::ConnectionPool pool;

  explicit ModuleInstance(ModulePtr m) : module(std::move(m)), state(module->make_state()) {}
};

struct Invoker::NativeSlot {
  std::uint64_t version = 0;
  ModulePtr module;
  std::shared_ptr<ModuleInstance> instance;
};

namespace {

class HostContext final : public FunctionContext {
 public:
  HostContext(InvocationContext info, ModuleState* state, Invoker& invoker, http::ConnectionPool& pool)
      : FunctionContext(std::move(info), state), invoker_(invoker), pool_(pool) {}

  nlohmann::json invoke(std::string_view target, const nlohmann::json& event) override {
    auto r = invoker_.dispatch_recursive_call(info(), target, event, &pool_);
    if (!r.ok()) throw FunctionError(r.error_message, r.error_type.empty() ? "FunctionError" : r.error_type);
    return std::move(r.value);
  }

 private:
  Invoker& invoker_;
  http::ConnectionPool& pool_;
};

std::vector<std::string> env_of(const FunctionUnit& unit) {
  std::vector<std::string> env;
  for (const auto& [k, v] : unit.config.environment) env.push_back(k + "=" + v);
  return env;
}

std::string depth_error(int limit) {
  return fmt::format("recursion depth limit {} exceeded", limit);
}

}  // namespace

Invoker::Invoker(Registry& registry, InvokerOptions options)
    : registry_(registry),
      options_(std::move(options)),
      catalog_(options_.catalog != nullptr ? *options_.catalog : ModuleCatalog::builtin()) {}

Invoker::~Invoker() { shutdown(); }

void Invoker::shutdown() {
  std::map<Key, std::pair<std::uint64_t, std::shared_ptr<worker::SharedWorker>>> workers;
  {
    std::lock_guard lock(workers_mutex_);
    workers.swap(shared_workers_);
    for (const auto& [key, entry] : workers) retired_spawns_ += entry.second->spawn_count();
  }
  for (auto& [key, entry] : workers) entry.second->shutdown();
}

InvocationContext Invoker::make_context(const FunctionUnit& unit, std::string request_id,
                                        int depth) const {
  InvocationContext ctx;
  ctx.request_id = request_id.empty() ? new_request_id() : std::move(request_id);
  ctx.function_name = unit.name;
  ctx.tenant = unit.tenant;
  ctx.remaining_time_ms = unit.config.timeout_ms;
  ctx.invoke_endpoint = options_.callback_endpoint;
  ctx.depth = depth;
  return ctx;
}

RuntimeKind Invoker::effective_kind(const FunctionUnit& unit) const {
  RuntimeKind kind = options_.executor.kind;
  if (kind == RuntimeKind::native && unit.runtime != RuntimeKind::native) kind = unit.runtime;
  if (kind == RuntimeKind::external_shared && options_.executor.isolation) {
    kind = RuntimeKind::external_nonshared;
  }
  return kind;
}

std::string Invoker::executor_label(const FunctionUnit& unit) const {
  ExecutorConfig cfg = options_.executor;
  cfg.kind = effective_kind(unit);
  return cfg.label();
}

void Invoker::record(const InvocationRecord& r) {
  if (options_.executor.logging && options_.log) options_.log->log(r);
}

InvocationResult Invoker::invoke(const FunctionUnit& unit, const nlohmann::json& event,
                                 const InvocationContext& ctx) {
  if (debug_on()) {
    options_.debug->emit("request", fmt::format("{} id={} tenant={} depth={}", unit.name,
                                                ctx.request_id, ctx.tenant, ctx.depth));
    options_.debug->emit("execute", fmt::format("{} handler={} executor={}", unit.name, unit.handler,
                                                executor_label(unit)));
  }
  const auto started = std::chrono::system_clock::now();
  InvocationResult result = ctx.depth >= options_.recursion_limit
                                ? InvocationResult::failure(depth_error(options_.recursion_limit))
                                : execute(unit, event, ctx);
  ++executed_;
  if (debug_on()) {
    options_.debug->emit("respond", fmt::format("{} id={} status={} duration_ms={:.3f}", unit.name,
                                                ctx.request_id, to_string(result.status),
                                                result.duration_ms));
  }
  if (options_.executor.logging && options_.log) {
    options_.log->log({started, ctx.request_id, ctx.tenant, unit.name, executor_label(unit),
                       result.duration_ms, result.status});
  }
  return result;
}

InvocationResult Invoker::execute(const FunctionUnit& unit, const nlohmann::json& event,
                                  const InvocationContext& ctx) {
  const RuntimeKind kind = effective_kind(unit);
  if (kind == RuntimeKind::native) return execute_native(unit, event, ctx);
  return execute_external(unit, kind, event, ctx);
}

std::shared_ptr<Invoker::ModuleInstance> Invoker::instance_for(const FunctionUnit& unit,
                                                               std::string* error) {
  const Key key{unit.tenant, unit.name};
  ModulePtr module;
  {
    std::lock_guard lock(native_mutex_);
    auto it = native_.find(key);
    if (it == native_.end() || it->second.version != unit.version || !it->second.module) {
      auto resolved = catalog_.resolve(unit.source, error);
      if (!resolved) return nullptr;
      NativeSlot slot;
      slot.version = unit.version;
      slot.module = resolved;
      slot.instance = std::make_shared<ModuleInstance>(resolved);
      it = native_.insert_or_assign(key, std::move(slot)).first;
    }
    if (!options_.executor.isolation) return it->second.instance;
    module = it->second.module;
  }
  // Isolation: a fresh module state and fresh connections for every call.
  return std::make_shared<ModuleInstance>(std::move(module));
}

InvocationResult Invoker::execute_native(const FunctionUnit& unit, const nlohmann::json& event,
                                         const InvocationContext& ctx) {
  std::string error;
  auto instance = instance_for(unit, &error);
  if (!instance) return InvocationResult::failure("handler not found: " + error, 0.0, "HandlerNotFound");
  const NativeFunction* fn = instance->module->find(unit.handler_function());
  if (fn == nullptr) {
    return InvocationResult::failure("handler not found: " + unit.handler, 0.0, "HandlerNotFound");
  }

  HostContext context(ctx, instance->state.get(), *this, instance->pool);
  const auto start = std::chrono::steady_clock::now();
  InvocationResult result;
  try {
    result = InvocationResult::success(fn->handler(event, context));
  } catch (const FunctionError& e) {
    result = InvocationResult::failure(e.what(), 0.0, e.type());
  } catch (const std::exception& e) {
    result = InvocationResult::failure(e.what(), 0.0, "Exception");
  }
  result.duration_ms = millis_between(start, std::chrono::steady_clock::now());
  // No preemption in-process: the limit is enforced on return.
  if (result.duration_ms > static_cast<double>(ctx.remaining_time_ms)) {
    return InvocationResult::timed_out(ctx.remaining_time_ms, result.duration_ms);
  }
  return result;
}

std::shared_ptr<worker::SharedWorker> Invoker::shared_worker_for(const FunctionUnit& unit) {
  const Key key{unit.tenant, unit.name};
  std::shared_ptr<worker::SharedWorker> retired;
  std::shared_ptr<worker::SharedWorker> current;
  {
    std::lock_guard lock(workers_mutex_);
    auto& entry = shared_workers_[key];
    if (!entry.second || entry.first != unit.version) {
      retired = std::move(entry.second);
      if (retired) retired_spawns_ += retired->spawn_count();
      worker::WorkerOptions opts;
      opts.executable = options_.worker_executable;
      opts.source = unit.source;
      opts.env = env_of(unit);
      opts.on_callback = [this](const InvocationContext& parent, const std::string& target,
                                const nlohmann::json& event) {
        return dispatch_recursive_call(parent, target, event, &pool_);
      };
      opts.on_stderr = [this, name = unit.name](std::string_view line) {
        if (debug_on()) options_.debug->emit("worker", name + ": " + std::string(line));
      };
      entry = {unit.version, std::make_shared<worker::SharedWorker>(std::move(opts))};
    }
    current = entry.second;
  }
  if (retired) retired->shutdown();
  return current;
}

InvocationResult Invoker::execute_external(const FunctionUnit& unit, RuntimeKind kind,
                                           const nlohmann::json& event,
                                           const InvocationContext& ctx) {
  if (options_.worker_executable.empty()) {
    return InvocationResult::failure("executor unavailable: no worker executable configured", 0.0,
                                     "ExecutorUnavailable");
  }
  const std::chrono::milliseconds timeout(ctx.remaining_time_ms);
  if (kind == RuntimeKind::external_shared) {
    return shared_worker_for(unit)->call(unit.handler, event, ctx, timeout);
  }
  worker::WorkerOptions opts;
  opts.executable = options_.worker_executable;
  opts.source = unit.source;
  opts.env = env_of(unit);
  opts.on_callback = [this](const InvocationContext& parent, const std::string& target,
                            const nlohmann::json& ev) {
    return dispatch_recursive_call(parent, target, ev, &pool_);
  };
  opts.on_stderr = [this, name = unit.name](std::string_view line) {
    if (debug_on()) options_.debug->emit("worker", name + ": " + std::string(line));
  };
  ++nonshared_spawns_;
  return worker::run_nonshared(opts, unit.handler, event, ctx, timeout);
}

InvocationResult Invoker::dispatch_recursive_call(const InvocationContext& ctx,
                                                  std::string_view target,
                                                  const nlohmann::json& event,
                                                  http::ConnectionPool* pool) {
  if (ctx.depth + 1 >= options_.recursion_limit) {
    return InvocationResult::failure(depth_error(options_.recursion_limit));
  }
  if (ctx.invoke_endpoint != kLocalEndpoint) {
    return dispatch_remote(ctx, target, event, pool != nullptr ? *pool : pool_);
  }
  const UnitPtr unit = registry_.resolve(ctx.tenant, target);
  if (!unit) return InvocationResult::failure("function not found: " + std::string(target));
  InvocationContext nested = make_context(*unit, {}, ctx.depth + 1);
  nested.tenant = ctx.tenant;
  nested.invoke_endpoint = ctx.invoke_endpoint;
  return invoke(*unit, event, nested);
}

InvocationResult Invoker::dispatch_remote(const InvocationContext& ctx, std::string_view target,
                                          const nlohmann::json& event, http::ConnectionPool& pool) {
  auto lease = pool.acquire(ctx.invoke_endpoint);
  if (!lease) return InvocationResult::failure("invalid invoke endpoint " + ctx.invoke_endpoint);

  http::Request request;
  request.method = "POST";
  request.target = "/2015-03-31/functions/" + std::string(target) + "/invocations";
  const auto& ep = (*lease)->endpoint();
  request.headers.set("Host", ep.host + ":" + std::to_string(ep.port));
  request.headers.set("Content-Type", "application/json");
  request.headers.set(kDepthHeader, std::to_string(ctx.depth + 1));
  request.body = event.dump();
  if (options_.sign_outbound) options_.sign_outbound(request, ctx.tenant);

  auto sent = (*lease)->send(request);
  if (!sent.response) {
    lease->discard();
    return InvocationResult::failure("endpoint unreachable: " + ctx.invoke_endpoint + " (" +
                                     sent.error + ")");
  }
  const http::Response& response = *sent.response;
  nlohmann::json body = nlohmann::json::parse(response.body, nullptr, false);
  if (response.status == 200 && !response.headers.contains("X-Amz-Function-Error")) {
    if (body.is_discarded()) return InvocationResult::failure("invalid JSON from " + ctx.invoke_endpoint);
    return InvocationResult::success(std::move(body));
  }
  std::string message;
  std::string type = "FunctionError";
  if (body.is_object()) {
    if (body.contains("errorMessage") && body["errorMessage"].is_string()) {
      message = body["errorMessage"].get<std::string>();
    } else if (body.contains("message") && body["message"].is_string()) {
      message = body["message"].get<std::string>();
    }
    if (body.contains("errorType") && body["errorType"].is_string()) {
      type = body["errorType"].get<std::string>();
    }
  }
  if (response.status != 200) {
    message = fmt::format("remote invoke of {} failed with HTTP {}{}{}", target, response.status,
                          message.empty() ? "" : ": ", message);
  }
  return InvocationResult::failure(std::move(message), 0.0, std::move(type));
}

void Invoker::reset_isolation_state(const FunctionUnit& unit) {
  const Key key{unit.tenant, unit.name};
  {
    std::lock_guard lock(native_mutex_);
    auto it = native_.find(key);
    if (it != native_.end() && it->second.module) {
      it->second.instance = std::make_shared<ModuleInstance>(it->second.module);
    }
  }
  std::shared_ptr<worker::SharedWorker> retired;
  {
    std::lock_guard lock(workers_mutex_);
    auto it = shared_workers_.find(key);
    if (it != shared_workers_.end()) {
      retired = std::move(it->second.second);
      retired_spawns_ += retired->spawn_count();
      shared_workers_.erase(it);
    }
  }
  if (retired) retired->shutdown();
}

std::size_t Invoker::worker_spawns() const {
  std::lock_guard lock(workers_mutex_);
  std::size_t n = retired_spawns_ + nonshared_spawns_;
  for (const auto& [key, entry] : shared_workers_) n += entry.second->spawn_count();
  return n;
}

}  // namespace snafu
