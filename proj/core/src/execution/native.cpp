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

#include "snafu/execution/native.hpp"

#include <dlfcn.h>

#include "snafu/common/error.hpp"
#include "snafu/execution/samples.hpp"

namespace snafu {

namespace {

class EmptyState final : public ModuleState {};

}  // namespace

NativeModule::NativeModule(std::string name, StateFactory make_state)
    : name_(std::move(name)), make_state_(std::move(make_state)) {}

NativeModule& NativeModule::add(std::string name, std::vector<std::string> params,
                                NativeHandler handler) {
  functions_.push_back({std::move(name), std::move(params), std::move(handler)});
  return *this;
}

const NativeFunction* NativeModule::find(std::string_view function) const {
  for (const auto& f : functions_) {
    if (f.name == function) return &f;
  }
  return nullptr;
}

std::vector<std::string> NativeModule::function_names() const {
  std::vector<std::string> out;
  out.reserve(functions_.size());
  for (const auto& f : functions_) out.push_back(f.name);
  return out;
}

std::unique_ptr<ModuleState> NativeModule::make_state() const {
  if (make_state_) return make_state_();
  return std::make_unique<EmptyState>();
}

ModuleCatalog& ModuleCatalog::builtin() {
  static ModuleCatalog* catalog = [] {
    auto* c = new ModuleCatalog;
    register_sample_modules(*c);
    return c;
  }();
  return *catalog;
}

void ModuleCatalog::add(ModulePtr module) {
  std::lock_guard lock(mutex_);
  modules_[module->name()] = std::move(module);
}

ModulePtr ModuleCatalog::find(std::string_view name) const {
  std::lock_guard lock(mutex_);
  const auto it = modules_.find(name);
  return it == modules_.end() ? nullptr : it->second;
}

std::vector<std::string> ModuleCatalog::module_names() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [name, m] : modules_) out.push_back(name);
  return out;
}

ModulePtr ModuleCatalog::resolve(const std::filesystem::path& source, std::string* error) const {
  if (source.extension() == ".so") return load_plugin(source, error);
  auto module = find(source.stem().string());
  if (!module && error != nullptr) *error = "no native module named '" + source.stem().string() + "'";
  return module;
}

ModulePtr ModuleCatalog::load_plugin(const std::filesystem::path& path, std::string* error) const {
  std::error_code ec;
  const auto mtime = std::filesystem::last_write_time(path, ec);
  if (ec) {
    if (error != nullptr) *error = "plugin " + path.string() + " not readable";
    return nullptr;
  }
  const std::int64_t stamp = mtime.time_since_epoch().count();
  const std::string key = path.string();
  {
    std::lock_guard lock(mutex_);
    auto it = plugins_.find(key);
    if (it != plugins_.end() && it->second.first == stamp) return it->second.second;
  }

  void* raw = ::dlopen(key.c_str(), RTLD_NOW | RTLD_LOCAL);
  if (raw == nullptr) {
    if (error != nullptr) *error = std::string("dlopen failed: ") + ::dlerror();
    return nullptr;
  }
  std::shared_ptr<void> handle(raw, [](void* h) { ::dlclose(h); });
  auto* entry = reinterpret_cast<PluginEntryPoint>(::dlsym(raw, kPluginEntryPoint));
  if (entry == nullptr) {
    if (error != nullptr) *error = "plugin " + key + " lacks " + kPluginEntryPoint;
    return nullptr;
  }
  auto module = std::make_shared<NativeModule>(path.stem().string());
  entry(*module);
  module->retain_library(std::move(handle));

  std::lock_guard lock(mutex_);
  plugins_[key] = {stamp, module};
  return module;
}

std::int64_t require_int(const nlohmann::json& event, std::string_view key) {
  if (!event.is_object()) throw FunctionError("event must be an object");
  const auto it = event.find(std::string(key));
  if (it == event.end()) throw FunctionError("missing parameter '" + std::string(key) + "'");
  if (!it->is_number_integer()) {
    throw FunctionError("parameter '" + std::string(key) + "' must be an integer");
  }
  return it->get<std::int64_t>();
}

}  // namespace snafu
