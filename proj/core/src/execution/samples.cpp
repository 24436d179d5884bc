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

#include "snafu/execution/samples.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "snafu/common/error.hpp"
#include "snafu/execution/native.hpp"

namespace snafu {

namespace {

struct CallCounter final : ModuleState {
  std::atomic<std::int64_t> calls{0};
};

std::unique_ptr<ModuleState> make_counter() { return std::make_unique<CallCounter>(); }

nlohmann::json fib_body(const nlohmann::json& event, FunctionContext& ctx, bool delay) {
  const std::int64_t n = require_int(event, "n");
  if (n < 1) throw FunctionError("fib: n must be >= 1, got " + std::to_string(n));

  const std::int64_t c = ++ctx.state<CallCounter>().calls;
  if (delay) {
    std::this_thread::sleep_for(std::chrono::milliseconds(kFibDelayMillis));
  } else {
    // Load only; the value is discarded.
    volatile double load = static_cast<double>(c) * std::sin(static_cast<double>(c));
    (void)load;
  }
  if (n <= 2) return 1;

  const std::string& self = ctx.info().function_name;
  const auto a = ctx.invoke(self, {{"n", n - 1}});
  const auto b = ctx.invoke(self, {{"n", n - 2}});
  if (!a.is_number_integer() || !b.is_number_integer()) {
    throw FunctionError("fib: nested call returned a non-integer");
  }
  return a.get<std::int64_t>() + b.get<std::int64_t>();
}

}  // namespace

void register_sample_modules(ModuleCatalog& catalog) {
  auto hello = std::make_shared<NativeModule>("hello");
  hello->add("helloworld", {}, [](const nlohmann::json&, FunctionContext&) -> nlohmann::json {
    return "Hello, World!";
  });
  catalog.add(hello);

  auto fib = std::make_shared<NativeModule>("fib", make_counter);
  fib->add("fib", {"n"}, [](const nlohmann::json& event, FunctionContext& ctx) {
    return fib_body(event, ctx, false);
  });
  fib->add("fib_delay", {"n"}, [](const nlohmann::json& event, FunctionContext& ctx) {
    return fib_body(event, ctx, true);
  });
  catalog.add(fib);

  auto counter = std::make_shared<NativeModule>("counter", make_counter);
  counter->add("counter", {}, [](const nlohmann::json&, FunctionContext& ctx) -> nlohmann::json {
    return ++ctx.state<CallCounter>().calls;
  });
  catalog.add(counter);

  auto util = std::make_shared<NativeModule>("util");
  util->add("echo", {"event"},
            [](const nlohmann::json& event, FunctionContext&) -> nlohmann::json { return event; });
  util->add("fail", {"message"}, [](const nlohmann::json& event, FunctionContext&) -> nlohmann::json {
    std::string message = "failure requested";
    if (event.is_object() && event.contains("message") && event["message"].is_string()) {
      message = event["message"].get<std::string>();
    }
    throw FunctionError(message);
  });
  util->add("sleep", {"ms"}, [](const nlohmann::json& event, FunctionContext&) -> nlohmann::json {
    const std::int64_t ms = require_int(event, "ms");
    if (ms < 0) throw FunctionError("sleep: ms must be >= 0");
    std::this_thread::sleep_for(std::chrono::milliseconds(ms));
    return ms;
  });
  catalog.add(util);
}

std::int64_t fib_call_count(std::int64_t n) {
  if (n < 1) throw std::invalid_argument("fib_call_count: n must be >= 1");
  std::int64_t prev = 1;  // F(1)
  std::int64_t cur = 1;   // F(2)
  for (std::int64_t i = 2; i < n; ++i) {
    const std::int64_t next = prev + cur;
    prev = cur;
    cur = next;
  }
  return 2 * (n == 1 ? prev : cur) - 1;
}

}  // namespace snafu
