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

#include "snafu/registry/registry.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <mutex>

#include <spdlog/spdlog.h>

#include "snafu/common/error.hpp"

namespace fs = std::filesystem;

namespace snafu {

namespace {

bool skipped_entry(const fs::path& p) {
  const std::string name = p.filename().string();
  return name.empty() || name.front() == '.' || name.front() == '_';
}

// Source file whose stem matches the handler's file half. Plugins win over
// other extensions so a rebuilt .so is picked up.
std::optional<fs::path> find_source(const fs::path& dir, const std::string& stem) {
  std::vector<fs::path> candidates;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file()) continue;
    const auto& p = entry.path();
    if (p.filename() == "config.json") continue;
    if (p.stem().string() == stem || p.filename().string() == stem) candidates.push_back(p);
  }
  if (candidates.empty()) return std::nullopt;
  std::sort(candidates.begin(), candidates.end());
  for (const auto& c : candidates) {
    if (c.extension() == ".so") return c;
  }
  return candidates.front();
}

}  // namespace

fs::path default_functions_dir() {
  if (const char* env = std::getenv("SNAFU_FUNCTIONS_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return "./functions";
}

std::variant<FunctionUnit, std::string> load_function_dir(const fs::path& dir) {
  const fs::path config_path = dir / "config.json";
  std::error_code ec;
  if (!fs::is_regular_file(config_path, ec)) return dir.filename().string() + ": no config.json";

  nlohmann::json config;
  {
    std::ifstream in(config_path);
    config = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
  }
  if (config.is_discarded()) return dir.filename().string() + ": config.json is not valid JSON";

  FunctionUnit unit;
  try {
    unit = unit_from_config_json(config);
  } catch (const ConfigError& e) {
    return dir.filename().string() + ": " + e.what();
  }
  if (auto reason = validate(unit)) return dir.filename().string() + ": " + *reason;

  auto source = find_source(dir, unit.handler_file());
  if (!source) {
    return dir.filename().string() + ": no source file for handler '" + unit.handler + "'";
  }
  unit.source = fs::absolute(*source);
  return unit;
}

LoadReport load_functions_dir(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw ConfigError("functions directory '" + root.string() + "' does not exist");
  }
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root, ec)) {
    if (entry.is_directory() && !skipped_entry(entry.path())) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());

  LoadReport report;
  for (const auto& dir : dirs) {
    auto loaded = load_function_dir(dir);
    if (auto* unit = std::get_if<FunctionUnit>(&loaded)) {
      report.units.push_back(std::move(*unit));
    } else {
      const auto& warning = std::get<std::string>(loaded);
      spdlog::warn("skipping function entry {}", warning);
      report.warnings.push_back(warning);
    }
  }
  return report;
}

RegisterResult Registry::register_unit(FunctionUnit unit) { return put(std::move(unit), true); }

RegisterResult Registry::create_unit(FunctionUnit unit) { return put(std::move(unit), false); }

RegisterResult Registry::put(FunctionUnit unit, bool allow_replace) {
  if (auto reason = validate(unit)) return {RegisterStatus::rejected, *reason, 0};
  std::unique_lock lock(mutex_);
  Key key{unit.tenant, unit.name};
  auto it = units_.find(key);
  if (it != units_.end() && !allow_replace) {
    return {RegisterStatus::conflict, "function '" + unit.name + "' already exists", 0};
  }
  unit.version = next_version_.fetch_add(1);
  const auto version = unit.version;
  auto ptr = std::make_shared<const FunctionUnit>(std::move(unit));
  if (it == units_.end()) {
    units_.emplace(std::move(key), std::move(ptr));
    return {RegisterStatus::added, {}, version};
  }
  it->second = std::move(ptr);
  return {RegisterStatus::replaced, {}, version};
}

UnitPtr Registry::lookup(std::string_view tenant, std::string_view name) const {
  std::shared_lock lock(mutex_);
  const auto it = units_.find(Key{std::string(tenant), std::string(name)});
  return it == units_.end() ? nullptr : it->second;
}

UnitPtr Registry::resolve(std::string_view tenant, std::string_view name) const {
  if (auto unit = lookup(tenant, name)) return unit;
  if (tenant == kDefaultTenant) return nullptr;
  return lookup(kDefaultTenant, name);
}

bool Registry::remove(std::string_view tenant, std::string_view name) {
  std::unique_lock lock(mutex_);
  return units_.erase(Key{std::string(tenant), std::string(name)}) > 0;
}

std::vector<std::string> Registry::list(std::string_view tenant) const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> names;
  for (const auto& [key, unit] : units_) {
    if (key.first == tenant) names.push_back(key.second);
  }
  return names;
}

std::vector<UnitPtr> Registry::all() const {
  std::shared_lock lock(mutex_);
  std::vector<UnitPtr> out;
  out.reserve(units_.size());
  for (const auto& [key, unit] : units_) out.push_back(unit);
  return out;
}

std::size_t Registry::size() const {
  std::shared_lock lock(mutex_);
  return units_.size();
}

}  // namespace snafu
