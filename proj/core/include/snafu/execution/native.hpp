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

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "snafu/execution/types.hpp"

namespace snafu {

// Module-level mutable state of a native module. Each module derives its
// own; a fresh instance is the module's initial state.
class ModuleState {
 public:
  virtual ~ModuleState() = default;
};

// What a running function sees of the host.
class FunctionContext {
 public:
  FunctionContext(InvocationContext info, ModuleState* state)
      : info_(std::move(info)), state_(state) {}
  virtual ~FunctionContext() = default;

  const InvocationContext& info() const { return info_; }

  // Calls another function through the host, in-process or via the
  // context's invoke endpoint. Returns the callee's value; throws
  // FunctionError when the callee does not succeed.
  virtual nlohmann::json invoke(std::string_view target, const nlohmann::json& event) = 0;

  template <class State>
  State& state() {
    auto* s = dynamic_cast<State*>(state_);
    if (s == nullptr) throw std::logic_error("module state type mismatch");
    return *s;
  }

 private:
  InvocationContext info_;
  ModuleState* state_;
};

using NativeHandler = std::function<nlohmann::json(const nlohmann::json& event, FunctionContext& ctx)>;

struct NativeFunction {
  std::string name;
  // Parameter names; "event" and "context" are preset by convention, the
  // rest are read from the event object by name.
  std::vector<std::string> params;
  NativeHandler handler;
};

class NativeModule {
 public:
  using StateFactory = std::function<std::unique_ptr<ModuleState>()>;

  explicit NativeModule(std::string name, StateFactory make_state = {});

  NativeModule& add(std::string name, std::vector<std::string> params, NativeHandler handler);
  // For plugins, whose module object is constructed by the loader.
  void set_state_factory(StateFactory make_state) { make_state_ = std::move(make_state); }

  const std::string& name() const { return name_; }
  const NativeFunction* find(std::string_view function) const;
  std::vector<std::string> function_names() const;
  const std::vector<NativeFunction>& functions() const { return functions_; }
  std::unique_ptr<ModuleState> make_state() const;

  // Keeps a plugin's shared object mapped for as long as the module lives.
  void retain_library(std::shared_ptr<void> handle) { library_ = std::move(handle); }

 private:
  // Declared first so it is released last: handlers live in the library.
  std::shared_ptr<void> library_;
  std::string name_;
  StateFactory make_state_;
  std::vector<NativeFunction> functions_;
};

using ModulePtr = std::shared_ptr<const NativeModule>;

// Entry point a plugin shared object exports:
//   extern "C" void snafu_register_module(snafu::NativeModule& module);
inline constexpr const char* kPluginEntryPoint = "snafu_register_module";
using PluginEntryPoint = void (*)(NativeModule&);

// Built-in module table plus plugins loaded on demand. A source file ending
// in ".so" is a plugin; any other source file names a built-in module by
// its stem.
class ModuleCatalog {
 public:
  // Catalog preloaded with the sample modules.
  static ModuleCatalog& builtin();

  void add(ModulePtr module);
  ModulePtr find(std::string_view name) const;
  std::vector<std::string> module_names() const;

  // Nullptr when the source resolves to nothing; `error` says why.
  ModulePtr resolve(const std::filesystem::path& source, std::string* error = nullptr) const;

 private:
  ModulePtr load_plugin(const std::filesystem::path& path, std::string* error) const;

  mutable std::mutex mutex_;
  std::map<std::string, ModulePtr, std::less<>> modules_;
  mutable std::map<std::string, std::pair<std::int64_t, ModulePtr>> plugins_;
};

// Integer parameter from an event object; throws FunctionError when absent
// or not an integer.
std::int64_t require_int(const nlohmann::json& event, std::string_view key);

}  // namespace snafu
