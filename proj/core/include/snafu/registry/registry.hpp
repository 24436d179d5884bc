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
#include <filesystem>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "snafu/registry/function_unit.hpp"

namespace snafu {

using UnitPtr = std::shared_ptr<const FunctionUnit>;

struct LoadReport {
  std::vector<FunctionUnit> units;
  std::vector<std::string> warnings;
};

// One unit per subdirectory holding a valid config.json. Hidden entries and
// names starting with '_' are skipped silently; broken entries produce a
// warning. Throws ConfigError when `root` is missing or not a directory.
LoadReport load_functions_dir(const std::filesystem::path& root);

// Loads a single `<root>/<name>/` entry: the unit, or the reason it is invalid.
std::variant<FunctionUnit, std::string> load_function_dir(const std::filesystem::path& dir);

// `$SNAFU_FUNCTIONS_DIR`, else "./functions".
std::filesystem::path default_functions_dir();

enum class RegisterStatus { added, replaced, rejected, conflict };

struct RegisterResult {
  RegisterStatus status;
  std::string reason;
  std::uint64_t version = 0;

  bool ok() const { return status == RegisterStatus::added || status == RegisterStatus::replaced; }
};

// Pool of deployed units keyed by (tenant, name). Readers share a lock,
// writers swap whole entries, so a lookup never sees a partially updated
// unit.
class Registry {
 public:
  // Replaces an existing unit of the same name (hot redeploy).
  RegisterResult register_unit(FunctionUnit unit);
  // Like register_unit but refuses to replace: conflict when the name is taken.
  RegisterResult create_unit(FunctionUnit unit);

  UnitPtr lookup(std::string_view tenant, std::string_view name) const;
  // The tenant's own unit, else the shared one of the default tenant.
  UnitPtr resolve(std::string_view tenant, std::string_view name) const;
  bool remove(std::string_view tenant, std::string_view name);
  std::vector<std::string> list(std::string_view tenant) const;
  std::vector<UnitPtr> all() const;
  std::size_t size() const;

 private:
  RegisterResult put(FunctionUnit unit, bool allow_replace);

  using Key = std::pair<std::string, std::string>;
  mutable std::shared_mutex mutex_;
  std::map<Key, UnitPtr, std::less<>> units_;
  std::atomic<std::uint64_t> next_version_{1};
};

}  // namespace snafu
