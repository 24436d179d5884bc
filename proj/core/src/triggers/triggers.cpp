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

#include "snafu/triggers/triggers.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "snafu/common/error.hpp"

namespace fs = std::filesystem;

namespace snafu {

namespace {

std::string require_string(const nlohmann::json& obj, const char* key, const char* where) {
  if (!obj.contains(key) || !obj[key].is_string()) {
    throw ConfigError(std::string(where) + " entry needs a string '" + key + "'");
  }
  return obj[key].get<std::string>();
}

constexpr const char* kUsage =
    "usage: call <function> [<json-event>] | list | quit";

}  // namespace

TriggerSet parse_triggers(const nlohmann::json& doc, const fs::path& base) {
  if (!doc.is_object()) throw ConfigError("triggers document must be an object");
  TriggerSet set;
  if (doc.contains("cron")) {
    if (!doc["cron"].is_array()) throw ConfigError("'cron' must be an array");
    for (const auto& c : doc["cron"]) {
      if (!c.is_object()) throw ConfigError("cron entry must be an object");
      nlohmann::json event = c.contains("event") ? c["event"] : nlohmann::json::object();
      set.cron.push_back(
          CronSpec::make(require_string(c, "spec", "cron"), require_string(c, "target", "cron"), event));
    }
  }
  if (doc.contains("fs")) {
    if (!doc["fs"].is_array()) throw ConfigError("'fs' must be an array");
    for (const auto& f : doc["fs"]) {
      if (!f.is_object()) throw ConfigError("fs entry must be an object");
      FsWatchSpec spec;
      spec.path = require_string(f, "path", "fs");
      if (spec.path.is_relative()) spec.path = base / spec.path;
      if (f.contains("glob")) spec.glob = require_string(f, "glob", "fs");
      spec.target = require_string(f, "target", "fs");
      set.fs.push_back(std::move(spec));
    }
  }
  return set;
}

TriggerSet load_triggers(const fs::path& functions_dir) {
  const fs::path file = functions_dir / kTriggersFile;
  std::ifstream in(file);
  if (!in) return {};
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError(file.string() + " is not valid JSON");
  try {
    return parse_triggers(doc, functions_dir);
  } catch (const ConfigError& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
}

int run_repl(std::istream& in, std::ostream& out, const ReplBackend& backend, bool prompt) {
  std::string line;
  while (true) {
    if (prompt) out << "snafu> " << std::flush;
    if (!std::getline(in, line)) break;
    std::istringstream words(line);
    std::string command;
    if (!(words >> command)) continue;

    if (command == "quit" || command == "exit") return 0;
    if (command == "list") {
      for (const auto& name : backend.list()) out << name << '\n';
      continue;
    }
    if (command != "call") {
      out << kUsage << '\n';
      continue;
    }
    std::string function;
    if (!(words >> function)) {
      out << kUsage << '\n';
      continue;
    }
    std::string rest;
    std::getline(words, rest);
    nlohmann::json event = nlohmann::json::object();
    if (rest.find_first_not_of(" \t") != std::string::npos) {
      event = nlohmann::json::parse(rest, nullptr, false);
      if (event.is_discarded()) {
        out << "invalid JSON event\n" << kUsage << '\n';
        continue;
      }
    }
    const InvocationResult result = backend.invoke(function, event);
    if (result.ok()) {
      out << result.value.dump() << '\n';
    } else {
      out << "error: " << result.error_type << ": " << result.error_message << '\n';
    }
  }
  return 0;
}

}  // namespace snafu
