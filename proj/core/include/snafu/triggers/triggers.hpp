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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "snafu/execution/types.hpp"
#include "snafu/triggers/cron.hpp"
#include "snafu/triggers/fs_trigger.hpp"

namespace snafu {

inline constexpr const char* kTriggersFile = "_triggers.json";

struct TriggerSet {
  std::vector<CronSpec> cron;
  std::vector<FsWatchSpec> fs;
};

// {"cron": [{"spec", "target", "event"}], "fs": [{"path", "glob", "target"}]}.
// Relative fs paths resolve against `base`. Throws ConfigError.
TriggerSet parse_triggers(const nlohmann::json& doc, const std::filesystem::path& base);

// `<functions_dir>/_triggers.json`; an absent file is an empty set.
TriggerSet load_triggers(const std::filesystem::path& functions_dir);

// Interactive loop:
//   call <function> [<json-event>]   invoke and print the result as JSON
//   list                             function names
//   quit | exit                      leave with status 0
struct ReplBackend {
  std::function<InvocationResult(const std::string& function, const nlohmann::json& event)> invoke;
  std::function<std::vector<std::string>()> list;
};

int run_repl(std::istream& in, std::ostream& out, const ReplBackend& backend, bool prompt = true);

}  // namespace snafu
