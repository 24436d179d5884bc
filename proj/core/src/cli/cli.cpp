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

#include "snafu/cli/cli.hpp"

#include <algorithm>
#include <iostream>

#include <CLI11.hpp>

#include "snafu/common/error.hpp"
#include "snafu/execution/invoker.hpp"
#include "snafu/execution/native.hpp"
#include "snafu/registry/registry.hpp"
#include "snafu/control/control_plane.hpp"
#include "snafu/worker/worker.hpp"

namespace fs = std::filesystem;

namespace snafu {

namespace {

bool preset(const std::string& param) { return param == "event" || param == "context"; }

std::vector<fs::path> expand(const std::vector<fs::path>& sources) {
  std::vector<fs::path> out;
  for (const auto& s : sources) {
    std::error_code ec;
    if (fs::is_directory(s, ec)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(s, ec)) {
        if (e.is_regular_file() && e.path().filename() != "config.json") files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      out.insert(out.end(), files.begin(), files.end());
    } else {
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace

CliOptions parse_cli_args(const std::vector<std::string>& args) {
  CliOptions o;
  std::string executor = "native";
  std::string event;
  std::vector<std::string> sources;
  CLI::App app{"Runs a function from source files", "snafu"};
  app.add_option("-x,--execute", o.execute, "function to run");
  app.add_option("--event", event, "event as JSON");
  app.add_option("-e,--executor", executor, "native|native-isolated|external-shared|external-nonshared");
  app.add_option("--worker", o.worker_executable, "external worker executable (env SNAFU_WORKER)");
  app.add_option("sources", sources, "source files or directories");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    o.help = true;
    o.help_text = app.help();
    return o;
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }
  if (o.execute.empty()) throw ConfigError("-x/--execute is required");
  if (sources.empty()) throw ConfigError("no source files given");
  const auto exec = parse_executor_flag(executor);
  if (!exec) throw ConfigError("unknown executor '" + executor + "'");
  o.executor = *exec;
  if (!event.empty()) o.event = event;
  for (auto& s : sources) o.sources.emplace_back(s);
  if (o.worker_executable.empty()) {
    if (const char* w = std::getenv("SNAFU_WORKER"); w != nullptr && *w != '\0') o.worker_executable = w;
  }
  if (o.worker_executable.empty()) o.worker_executable = sibling_executable("snafu-stub-worker");
  return o;
}

std::vector<ExtractedFunction> extract_functions(const std::vector<fs::path>& sources, RuntimeKind kind,
                                                 const std::string& worker_executable) {
  std::vector<ExtractedFunction> out;
  for (const auto& source : expand(sources)) {
    if (kind == RuntimeKind::native) {
      std::string error;
      const auto module = ModuleCatalog::builtin().resolve(source, &error);
      if (!module) throw ConfigError(source.string() + ": " + error);
      for (const auto& f : module->functions()) out.push_back({f.name, f.params, source});
      continue;
    }
    if (worker_executable.empty()) throw ConfigError("no worker executable for external execution");
    worker::WorkerOptions wo;
    wo.executable = worker_executable;
    wo.source = source;
    std::string error;
    const auto listing = worker::enumerate_source(wo, std::chrono::seconds(10), &error);
    if (!listing) throw ConfigError(source.string() + ": " + error);
    for (const auto& name : listing->functions) {
      const auto it = listing->signatures.find(name);
      out.push_back({name, it == listing->signatures.end() ? std::vector<std::string>{} : it->second, source});
    }
  }
  return out;
}

nlohmann::json parse_prompt_value(const std::string& line) {
  auto v = nlohmann::json::parse(line, nullptr, false);
  if (!v.is_discarded() && v.is_primitive()) return v;
  return line;
}

std::optional<nlohmann::json> prompt_missing_args(const std::vector<std::string>& params,
                                                  nlohmann::json provided, std::istream& in,
                                                  std::ostream& out, bool interactive) {
  if (provided.is_null()) provided = nlohmann::json::object();
  for (const auto& p : params) {
    if (preset(p)) continue;
    if (provided.is_object() && provided.contains(p)) continue;
    if (!interactive || !provided.is_object()) return std::nullopt;
    out << p << " = ? " << std::flush;
    std::string line;
    if (!std::getline(in, line)) return std::nullopt;
    provided[p] = parse_prompt_value(line);
  }
  return provided;
}

int run_execute(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err,
                bool interactive) {
  CliOptions opts;
  try {
    opts = parse_cli_args(args);
  } catch (const ConfigError& e) {
    err << "snafu: " << e.what() << "\n";
    return kExitUsage;
  }
  if (opts.help) {
    out << opts.help_text;
    return kExitOk;
  }

  RuntimeKind kind = opts.executor.kind;
  if (kind == RuntimeKind::external_shared && opts.executor.isolation) kind = RuntimeKind::external_nonshared;
  std::vector<ExtractedFunction> functions;
  try {
    functions = extract_functions(opts.sources, kind, opts.worker_executable);
  } catch (const ConfigError& e) {
    err << "snafu: " << e.what() << "\n";
    return kExitUsage;
  }

  const auto target = std::find_if(functions.begin(), functions.end(),
                                   [&](const ExtractedFunction& f) { return f.name == opts.execute; });
  if (target == functions.end()) {
    err << "snafu: unknown function '" << opts.execute << "'; candidates:";
    for (const auto& f : functions) err << ' ' << f.name;
    err << "\n";
    return kExitUsage;
  }

  nlohmann::json event = nlohmann::json::object();
  if (opts.event) {
    event = nlohmann::json::parse(*opts.event, nullptr, false);
    if (event.is_discarded()) {
      err << "snafu: --event is not valid JSON\n";
      return kExitUsage;
    }
  }
  const auto completed = prompt_missing_args(target->params, event, in, out, interactive);
  if (!completed) {
    err << "snafu: missing arguments for " << target->name << " and no interactive input\n";
    return kExitUsage;
  }

  Registry registry;
  for (const auto& f : functions) {
    FunctionUnit unit;
    unit.name = f.name;
    unit.handler = f.source.stem().string() + "." + f.name;
    unit.runtime = kind;
    unit.source = f.source;
    registry.register_unit(std::move(unit));
  }
  InvokerOptions io;
  io.executor = opts.executor;
  io.worker_executable = opts.worker_executable;
  Invoker invoker(registry, std::move(io));
  const UnitPtr unit = registry.lookup(kDefaultTenant, target->name);
  const InvocationResult result = invoker.invoke(*unit, *completed, invoker.make_context(*unit));
  invoker.shutdown();

  if (result.ok()) {
    out << result.value.dump() << "\n";
    return kExitOk;
  }
  err << "error: " << result.error_type << ": " << result.error_message << "\n";
  return kExitFunctionError;
}

}  // namespace snafu
