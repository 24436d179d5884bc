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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "snafu/execution/types.hpp"

namespace snafu {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFunctionError = 1;
inline constexpr int kExitUsage = 2;

struct CliOptions {
  std::string execute;
  std::vector<std::filesystem::path> sources;
  std::optional<std::string> event;
  ExecutorConfig executor;
  std::string worker_executable;
  bool help = false;
  std::string help_text;
};

// -x/--execute <name>, --event <json>, -e/--executor <kind>, --worker <exe>,
// positional source paths. Throws ConfigError.
CliOptions parse_cli_args(const std::vector<std::string>& args);

struct ExtractedFunction {
  std::string name;
  std::vector<std::string> params;
  std::filesystem::path source;
};

// Every function found in the sources. A directory contributes its files;
// a path that does not exist still names a built-in native module by its
// stem. External executors ask a worker to enumerate each source.
// Throws ConfigError when a source yields nothing.
std::vector<ExtractedFunction> extract_functions(const std::vector<std::filesystem::path>& sources,
                                                 RuntimeKind kind, const std::string& worker_executable);

// A prompted value: a JSON scalar, else the line itself as a string.
nlohmann::json parse_prompt_value(const std::string& line);

// Fills parameters absent from `provided` ("event" and "context" are
// preset) by asking "<name> = ? " on `out`. Nullopt when an answer is
// needed but the session is not interactive or input ends.
std::optional<nlohmann::json> prompt_missing_args(const std::vector<std::string>& params,
                                                  nlohmann::json provided, std::istream& in,
                                                  std::ostream& out, bool interactive);

// The snafu command. Prints the result as JSON on `out`. Exit status 0 on
// success, 1 on a function error or timeout, 2 on usage errors.
int run_execute(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
                std::ostream& err, bool interactive);

}  // namespace snafu
