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

#include <mutex>
#include <thread>

#include <gtest/gtest.h>

#include "snafu/common/error.hpp"
#include "snafu/execution/invoker.hpp"
#include "snafu/execution/native.hpp"
#include "snafu/execution/samples.hpp"
#include "snafu/observability/debug_output.hpp"
#include "snafu/observability/invocation_log.hpp"
#include "snafu/registry/registry.hpp"
#include "support.hpp"

using namespace snafu;
namespace tk = snafu::testkit;

namespace {

FunctionUnit sample_unit(const std::string& name, const std::string& module, RuntimeKind kind = RuntimeKind::native,
                         std::int64_t timeout_ms = 60000) {
  FunctionUnit u;
  u.name = name;
  u.handler = module + "." + name;
  u.source = module + ".native";
  u.runtime = kind;
  u.config.timeout_ms = timeout_ms;
  return u;
}

struct Host {
  Registry registry;
  std::unique_ptr<Invoker> invoker;
  std::mutex m;
  std::vector<std::string> debug_lines;

  explicit Host(ExecutorConfig exec = {}, std::shared_ptr<InvocationLog> log = nullptr, int limit = kDefaultRecursionLimit) {
    for (const auto& [name, module] : std::vector<std::pair<std::string, std::string>>{
             {"fib", "fib"}, {"fib_delay", "fib"}, {"counter", "counter"}, {"helloworld", "hello"},
             {"echo", "util"}, {"fail", "util"}, {"sleep", "util"}}) {
      registry.register_unit(sample_unit(name, module));
    }
    InvokerOptions o;
    o.executor = exec;
    o.worker_executable = tk::worker_executable();
    o.log = std::move(log);
    o.recursion_limit = limit;
    o.debug = std::make_shared<DebugOutput>(exec.debug_output, [this](std::string_view line) {
      std::lock_guard l(m);
      debug_lines.emplace_back(line);
    });
    invoker = std::make_unique<Invoker>(registry, o);
  }

  InvocationResult call(const std::string& name, const nlohmann::json& event = nlohmann::json::object()) {
    auto u = registry.lookup("default", name);
    if (!u) throw std::runtime_error("no unit " + name);
    return invoker->invoke(*u, event, invoker->make_context(*u));
  }
};

}  // namespace

TEST(FibCallCount, KnownValues) {
  EXPECT_EQ(fib_call_count(1), 1);
  EXPECT_EQ(fib_call_count(12), 287);
  EXPECT_EQ(fib_call_count(20), 13529);
  EXPECT_THROW(fib_call_count(0), std::invalid_argument);
}

TEST(FibCallCount, AgreesWithDirectRecursion) {
  for (int n = 1; n <= 25; ++n) EXPECT_EQ(fib_call_count(n), tk::fib_oracle(n).calls) << n;
}

TEST(Native, HelloWorld) {
  Host h;
  const auto r = h.call("helloworld");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.value, "Hello, World!");
  EXPECT_GE(r.duration_ms, 0.0);
}

TEST(Native, FibSeven) {
  Host h;
  EXPECT_EQ(h.call("fib", {{"n", 7}}).value, 13);
}

TEST(Native, FibDomainError) {
  Host h;
  const auto r = h.call("fib", {{"n", 0}});
  EXPECT_EQ(r.status, InvocationStatus::function_error);
  EXPECT_FALSE(r.error_message.empty());
  EXPECT_EQ(h.call("fib", {{"x", 1}}).status, InvocationStatus::function_error);
}

TEST(Native, FibCountsEveryCall) {
  for (int n : {1, 3, 12, 20}) {
    Host h;
    const auto oracle = tk::fib_oracle(n);
    const auto r = h.call("fib", {{"n", n}});
    ASSERT_TRUE(r.ok()) << r.error_message;
    EXPECT_EQ(r.value, oracle.value);
    EXPECT_EQ(static_cast<std::int64_t>(h.invoker->executed_count()), oracle.calls);
  }
}

TEST(Native, FailCarriesMessageAndType) {
  Host h;
  const auto r = h.call("fail", {{"message", "nope"}});
  EXPECT_EQ(r.status, InvocationStatus::function_error);
  EXPECT_EQ(r.error_message, "nope");
}

TEST(Native, EchoReturnsEvent) {
  Host h;
  const nlohmann::json ev{{"a", {1, 2, 3}}, {"b", "x\ny"}};
  EXPECT_EQ(h.call("echo", ev).value, ev);
}

TEST(Native, TimeoutIsReported) {
  Host h;
  h.registry.register_unit(sample_unit("sleep", "util", RuntimeKind::native, 100));
  const auto r = h.call("sleep", {{"ms", 300}});
  EXPECT_EQ(r.status, InvocationStatus::timeout);
  EXPECT_FALSE(r.error_message.empty());
}

TEST(Native, UnknownHandler) {
  Host h;
  h.registry.register_unit(sample_unit("nothere", "hello"));
  const auto r = h.call("nothere");
  EXPECT_EQ(r.status, InvocationStatus::function_error);
  EXPECT_NE(r.error_message.find("handler not found"), std::string::npos);
}

TEST(Isolation, OffKeepsState) {
  Host h;
  EXPECT_EQ(h.call("counter").value, 1);
  EXPECT_EQ(h.call("counter").value, 2);
  EXPECT_EQ(h.call("counter").value, 3);
}

TEST(Isolation, OnResetsEveryCall) {
  ExecutorConfig exec;
  exec.isolation = true;
  Host h(exec);
  EXPECT_EQ(h.call("counter").value, 1);
  EXPECT_EQ(h.call("counter").value, 1);
  EXPECT_EQ(h.call("counter").value, 1);
}

TEST(Isolation, ExplicitReset) {
  Host h;
  EXPECT_EQ(h.call("counter").value, 1);
  EXPECT_EQ(h.call("counter").value, 2);
  h.invoker->reset_isolation_state(*h.registry.lookup("default", "counter"));
  EXPECT_EQ(h.call("counter").value, 1);
}

TEST(Recursion, LocalDispatchFromContext) {
  Host h;
  auto u = h.registry.lookup("default", "fib");
  auto ctx = h.invoker->make_context(*u);
  const auto r = h.invoker->dispatch_recursive_call(ctx, "fib", {{"n", 3}});
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.value, 2);
}

TEST(Recursion, DepthLimit) {
  Host h({}, nullptr, 5);
  const auto r = h.call("fib", {{"n", 10}});
  EXPECT_EQ(r.status, InvocationStatus::function_error);
  EXPECT_NE(r.error_message.find("depth"), std::string::npos);
  EXPECT_TRUE(h.call("fib", {{"n", 5}}).ok());
}

TEST(Recursion, UnknownTarget) {
  Host h;
  auto u = h.registry.lookup("default", "fib");
  const auto r = h.invoker->dispatch_recursive_call(h.invoker->make_context(*u), "missing", {});
  EXPECT_EQ(r.status, InvocationStatus::function_error);
}

TEST(Logging, OneRecordPerCall) {
  tk::TempDir dir;
  auto log = std::make_shared<InvocationLog>(dir / "log.csv");
  ExecutorConfig exec;
  exec.logging = true;
  {
    Host h(exec, log);
    ASSERT_TRUE(h.call("fib", {{"n", 12}}).ok());
    log->flush();
  }
  EXPECT_EQ(tk::csv_rows(dir / "log.csv"), 287u);
  EXPECT_EQ(log->written(), 287u);
}

TEST(Logging, OffWritesNothing) {
  tk::TempDir dir;
  auto log = std::make_shared<InvocationLog>(dir / "log.csv");
  Host h({}, log);
  ASSERT_TRUE(h.call("fib", {{"n", 5}}).ok());
  log->flush();
  EXPECT_EQ(log->written(), 0u);
  EXPECT_EQ(tk::csv_rows(dir / "log.csv"), 0u);
}

TEST(Debug, StagesWhenOn) {
  ExecutorConfig exec;
  exec.debug_output = true;
  Host h(exec);
  ASSERT_TRUE(h.call("helloworld").ok());
  ASSERT_EQ(h.debug_lines.size(), 3u);
  EXPECT_NE(h.debug_lines[0].find("] request: helloworld"), std::string::npos);
  EXPECT_NE(h.debug_lines[1].find("] execute: helloworld"), std::string::npos);
  EXPECT_NE(h.debug_lines[2].find("] respond: helloworld"), std::string::npos);
}

TEST(Debug, SilentWhenOff) {
  Host h;
  ASSERT_TRUE(h.call("fib", {{"n", 6}}).ok());
  EXPECT_TRUE(h.debug_lines.empty());
}

TEST(Plugin, LoadsModuleFromSharedObject) {
  Host h;
  for (const char* fn : {"greet", "tally", "refuse"}) {
    FunctionUnit u;
    u.name = fn;
    u.handler = std::string("testplug.") + fn;
    u.source = tk::plugin_path();
    h.registry.register_unit(u);
  }
  EXPECT_EQ(h.call("greet", {{"name", "Ada"}}).value, "Hello, Ada!");
  EXPECT_EQ(h.call("tally").value, 1);
  EXPECT_EQ(h.call("tally").value, 2);
  const auto r = h.call("refuse");
  EXPECT_EQ(r.status, InvocationStatus::function_error);
  EXPECT_EQ(r.error_message, "refused");
  EXPECT_EQ(r.error_type, "Refusal");
}

TEST(Plugin, CatalogResolution) {
  std::string error;
  EXPECT_EQ(ModuleCatalog::builtin().resolve("somewhere/fib.native")->name(), "fib");
  EXPECT_EQ(ModuleCatalog::builtin().resolve("nosuch.native", &error), nullptr);
  EXPECT_FALSE(error.empty());
  EXPECT_EQ(ModuleCatalog::builtin().resolve("/nonexistent/lib.so", &error), nullptr);
  const auto plug = ModuleCatalog::builtin().resolve(tk::plugin_path());
  ASSERT_NE(plug, nullptr);
  auto names = plug->function_names();
  std::sort(names.begin(), names.end());
  EXPECT_EQ(names, (std::vector<std::string>{"greet", "refuse", "tally"}));
}

TEST(ExecutorConfig, LabelsAndFlags) {
  ExecutorConfig c;
  EXPECT_EQ(c.label(), "IP");
  c.debug_output = c.logging = true;
  EXPECT_EQ(c.label(), "IP+O+L");
  c = {};
  c.debug_output = c.authentication = true;
  EXPECT_EQ(c.label(), "IP+AWS4+O");
  c = {};
  c.isolation = true;
  EXPECT_EQ(c.label(), "IIP");
  c.debug_output = c.logging = c.authentication = true;
  EXPECT_EQ(c.label(), "IIP+AWS4+O+L");
  EXPECT_EQ(parse_executor_flag("external-shared")->label(), "EXT-SHARED");
  EXPECT_EQ(parse_executor_flag("external-nonshared")->label(), "EXT-NONSHARED");
  EXPECT_TRUE(parse_executor_flag("native-isolated")->isolation);
  EXPECT_FALSE(parse_executor_flag("java").has_value());
}

class External : public ::testing::TestWithParam<RuntimeKind> {
 protected:
  ExecutorConfig exec() const {
    ExecutorConfig e;
    e.kind = GetParam();
    return e;
  }
};

TEST_P(External, FibMatchesNative) {
  Host h(exec());
  for (int n : {1, 2, 7}) {
    const auto r = h.call("fib", {{"n", n}});
    ASSERT_TRUE(r.ok()) << r.error_message;
    EXPECT_EQ(r.value, tk::fib_oracle(n).value);
  }
  EXPECT_EQ(h.call("helloworld").value, "Hello, World!");
}

TEST_P(External, ErrorsPropagate) {
  Host h(exec());
  const auto r = h.call("fail", {{"message", "broken"}});
  EXPECT_EQ(r.status, InvocationStatus::function_error);
  EXPECT_EQ(r.error_message, "broken");
}

TEST_P(External, CounterState) {
  Host h(exec());
  std::vector<nlohmann::json> got;
  for (int i = 0; i < 3; ++i) got.push_back(h.call("counter").value);
  if (GetParam() == RuntimeKind::external_shared) {
    EXPECT_EQ(got, (std::vector<nlohmann::json>{1, 2, 3}));
  } else {
    EXPECT_EQ(got, (std::vector<nlohmann::json>{1, 1, 1}));
  }
}

TEST_P(External, SpawnCounts) {
  Host h(exec());
  const int calls = GetParam() == RuntimeKind::external_shared ? 100 : 3;
  for (int i = 0; i < calls; ++i) ASSERT_TRUE(h.call("fib", {{"n", 1}}).ok());
  EXPECT_EQ(h.invoker->worker_spawns(), GetParam() == RuntimeKind::external_shared ? 1u : 3u);
}

TEST_P(External, WorkerStderrBecomesDebugLines) {
  ExecutorConfig e = exec();
  e.debug_output = true;
  Host h(e);
  h.registry.register_unit(sample_unit("ghost", "nosuchmodule", GetParam()));
  const auto r = h.call("ghost");
  EXPECT_EQ(r.status, InvocationStatus::function_error);
  EXPECT_TRUE(tk::eventually(
      [&] {
        std::lock_guard l(h.m);
        return std::any_of(h.debug_lines.begin(), h.debug_lines.end(),
                           [](const std::string& l) { return l.find("] worker: ghost") != std::string::npos; });
      },
      std::chrono::seconds(2)));
}

INSTANTIATE_TEST_SUITE_P(Kinds, External, ::testing::Values(RuntimeKind::external_shared, RuntimeKind::external_nonshared),
                         [](const auto& info) {
                           return info.param == RuntimeKind::external_shared ? "Shared" : "Nonshared";
                         });

TEST(ExternalRuntime, UnitRuntimeSelectsExecutorUnderNativeHost) {
  Host h;
  h.registry.register_unit(sample_unit("counter", "counter", RuntimeKind::external_nonshared));
  EXPECT_EQ(h.invoker->effective_kind(*h.registry.lookup("default", "counter")), RuntimeKind::external_nonshared);
}
