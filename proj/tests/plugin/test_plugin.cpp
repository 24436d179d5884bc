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

// A native module loaded at run time, used by the plugin loading tests.

#include <memory>
#include <string>

#include "snafu/common/error.hpp"
#include "snafu/execution/native.hpp"

namespace {

struct Tally : snafu::ModuleState {
  int calls = 0;
};

}  // namespace

extern "C" void snafu_register_module(snafu::NativeModule& module) {
  module.set_state_factory([] { return std::make_unique<Tally>(); });
  module.add("greet", {"name"}, [](const nlohmann::json& event, snafu::FunctionContext&) -> nlohmann::json {
    return "Hello, " + event.value("name", std::string("stranger")) + "!";
  });
  module.add("tally", {}, [](const nlohmann::json&, snafu::FunctionContext& ctx) -> nlohmann::json {
    return ++ctx.state<Tally>().calls;
  });
  module.add("refuse", {}, [](const nlohmann::json&, snafu::FunctionContext&) -> nlohmann::json {
    throw snafu::FunctionError("refused", "Refusal");
  });
}
