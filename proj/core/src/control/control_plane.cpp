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

#include "snafu/control/control_plane.hpp"

#include <unistd.h>

#include <charconv>
#include <fstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "snafu/auth/crypto.hpp"
#include "snafu/common/error.hpp"
#include "snafu/common/ids.hpp"
#include "snafu/triggers/triggers.hpp"

namespace fs = std::filesystem;

namespace snafu {

namespace {

constexpr std::string_view kFunctionsPrefix = "/2015-03-31/functions";
constexpr std::string_view kInvokePrefix = "/invoke/";

bool hop_by_hop(std::string_view name) {
  for (std::string_view h : {"Connection", "Keep-Alive", "Transfer-Encoding", "Content-Length", "TE",
                             "Upgrade", "Proxy-Connection", "Expect"}) {
    if (http::iequals(name, h)) return true;
  }
  return false;
}

bool valid_name(std::string_view name) {
  if (name.empty() || name.size() > 140) return false;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_';
    if (!ok) return false;
  }
  return true;
}

http::Response function_error(const InvocationResult& r) {
  http::Response resp = http::Response::json(
      200, {{"errorMessage", r.error_message},
            {"errorType", r.error_type.empty() ? "FunctionError" : r.error_type}});
  resp.headers.set(kFunctionErrorHeader, "Unhandled");
  return resp;
}

InvocationStatus status_of(const http::Response& r) {
  if (r.status != 200 || r.headers.contains(kFunctionErrorHeader)) {
    const auto body = nlohmann::json::parse(r.body, nullptr, false);
    if (body.is_object() && body.value("errorType", "") == "Timeout") return InvocationStatus::timeout;
    return InvocationStatus::function_error;
  }
  return InvocationStatus::ok;
}

}  // namespace

std::string sibling_executable(const std::string& name) {
  std::error_code ec;
  const fs::path self = fs::read_symlink("/proc/self/exe", ec);
  if (ec) return {};
  const fs::path candidate = self.parent_path() / name;
  return fs::exists(candidate, ec) ? candidate.string() : std::string{};
}

ControlPlane::ControlPlane(InstanceConfig config, std::string executable)
    : config_(std::move(config)),
      executable_(std::move(executable)),
      forward_pool_(std::chrono::minutes(5)) {
  if (auto p = config_.problem()) throw ConfigError(*p);
  if (executable_.empty()) {
    std::error_code ec;
    executable_ = fs::read_symlink("/proc/self/exe", ec).string();
  }
  if (config_.worker_executable.empty()) config_.worker_executable = sibling_executable("snafu-stub-worker");
}

ControlPlane::~ControlPlane() { stop(); }

std::string ControlPlane::tenant_of(const std::string& authenticated) const {
  return config_.tenant ? *config_.tenant : authenticated;
}

void ControlPlane::load_functions() {
  std::error_code ec;
  const bool exists = fs::is_directory(config_.functions_dir, ec);
  if (!exists && config_.functions_dir_explicit) {
    throw ConfigError("functions directory " + config_.functions_dir.string() + " does not exist");
  }
  if (exists) {
    auto report = load_functions_dir(config_.functions_dir);
    for (const auto& w : report.warnings) spdlog::warn("{}", w);
    for (auto& unit : report.units) {
      const auto r = registry_.register_unit(std::move(unit));
      if (!r.ok()) spdlog::warn("not registered: {}", r.reason);
    }
  } else {
    spdlog::info("functions directory {} absent; starting empty", config_.functions_dir.string());
  }

  created_root_ = config_.functions_dir / kCreatedDir;
  for (const auto& tenant_dir : fs::directory_iterator(created_root_, ec)) {
    const std::string tenant = tenant_dir.path().filename().string();
    if (!tenant_dir.is_directory() || (config_.tenant && *config_.tenant != tenant)) continue;
    std::error_code ec2;
    for (const auto& dir : fs::directory_iterator(tenant_dir.path(), ec2)) {
      auto loaded = load_function_dir(dir.path());
      if (auto* unit = std::get_if<FunctionUnit>(&loaded)) {
        unit->tenant = tenant;
        registry_.register_unit(std::move(*unit));
      } else {
        spdlog::warn("{}", std::get<std::string>(loaded));
      }
    }
  }
}

void ControlPlane::start() {
  if (started_) return;

  if (config_.auth_mode != AuthMode::none) {
    try {
      accounts_ = std::make_shared<AccountStore>(config_.accounts_file);
    } catch (const fs::filesystem_error& e) {
      throw ConfigError("accounts file " + config_.accounts_file.string() + ": " + e.code().message());
    }
  }
  authenticator_ = std::make_unique<Authenticator>(config_.auth_mode, accounts_);
  if (config_.executor.logging) log_ = std::make_shared<InvocationLog>(config_.log_file);
  debug_ = std::make_shared<DebugOutput>(config_.executor.debug_output);

  load_functions();

  http::ServerOptions so;
  so.bind_address = config_.bind_address;
  so.port = config_.port;
  so.reaper = config_.reaper;
  server_ = std::make_unique<http::Server>(so, [this](const http::Request& r) {
    if (!ready_) return http::Response::error(503, "starting");
    return handle(r);
  });
  server_->start();
  started_ = true;
  if (config_.callback_endpoint == kSelfEndpoint) config_.callback_endpoint = url();

  InvokerOptions io;
  io.executor = config_.executor;
  io.worker_executable = config_.worker_executable;
  io.callback_endpoint = config_.forward_target ? std::string(kLocalEndpoint) : config_.callback_endpoint;
  io.log = log_;
  io.debug = debug_;
  if (config_.auth_mode != AuthMode::none) {
    io.sign_outbound = [auth = authenticator_.get()](http::Request& req, const std::string& tenant) {
      if (!auth->sign_outbound(req, tenant)) spdlog::warn("no account to sign nested call as {}", tenant);
    };
  }
  invoker_ = std::make_unique<Invoker>(registry_, std::move(io));

  if (config_.per_tenant_spawn) {
    SpawnerOptions so;
    so.executable = executable_;
    so.args = [cfg = config_](const std::string& tenant) { return tenant_child_args(cfg, tenant); };
    spawner_ = std::make_unique<TenantSpawner>(std::move(so));
  }

  ready_ = true;

  if (!config_.connection_stats_file.empty()) {
    sampler_ = std::make_unique<ConnectionSampler>(
        [this] {
          const auto s = server_->stats();
          ConnectionStat c;
          c.open_count = s.open;
          c.unread_response_count = s.unread_responses;
          return c;
        },
        config_.connection_stats_interval, config_.connection_stats_file);
    sampler_->start();
  }

  std::error_code ec;
  if (fs::is_directory(config_.functions_dir, ec)) {
    HotDeployer::Options ho;
    deployer_ = std::make_unique<HotDeployer>(registry_, config_.functions_dir, ho, [](const DeployEvent& e) {
      switch (e.kind) {
        case DeployEvent::Kind::registered:
          spdlog::info("deployed {} (version {})", e.name, e.version);
          break;
        case DeployEvent::Kind::removed:
          spdlog::info("removed {}", e.name);
          break;
        case DeployEvent::Kind::rejected:
          spdlog::warn("rejected {}: {}", e.name, e.detail);
          break;
      }
    });
    deployer_->start();
    start_triggers();
  }
  spdlog::info("listening on {}:{} executor={} auth={}", config_.bind_address, port(),
               config_.executor.label(), to_string(config_.auth_mode));
}

void ControlPlane::start_triggers() {
  // Children leave triggers to their parent.
  if (config_.tenant) return;
  const TriggerSet triggers = load_triggers(config_.functions_dir);
  if (!triggers.cron.empty()) {
    scheduler_ = std::make_unique<CronScheduler>([this](const CronSpec& spec) {
      const auto r = dispatch(spec.target, spec.event);
      if (!r.ok()) spdlog::warn("cron {} -> {}: {}", spec.expression, spec.target, r.error_message);
    });
    for (const auto& spec : triggers.cron) scheduler_->add(spec);
    scheduler_->start();
  }
  for (const auto& spec : triggers.fs) {
    auto t = std::make_unique<FsTrigger>(spec, [this](const FsWatchSpec& s, const nlohmann::json& event) {
      const auto r = dispatch(s.target, event);
      if (!r.ok()) spdlog::warn("fs {} -> {}: {}", s.path.string(), s.target, r.error_message);
    });
    t->start();
    fs_triggers_.push_back(std::move(t));
  }
}

void ControlPlane::stop() {
  if (!started_) return;
  started_ = false;
  ready_ = false;
  if (scheduler_) scheduler_->stop();
  for (auto& t : fs_triggers_) t->stop();
  if (deployer_) deployer_->stop();
  if (sampler_) sampler_->stop();
  server_->stop();
  if (spawner_) spawner_->shutdown();
  invoker_->shutdown();
  if (log_) {
    log_->flush();
    if (log_->failed() > 0) spdlog::error("{} invocation log rows failed to write", log_->failed());
  }
}

int ControlPlane::port() const { return server_ ? server_->port() : config_.port; }

std::string ControlPlane::url() const { return "http://127.0.0.1:" + std::to_string(port()); }

nlohmann::json ControlPlane::stats() const {
  const auto s = server_->stats();
  return {{"executed", invoker_->executed_count()},
          {"forwarded", forwarded_.load()},
          {"functions", registry_.size()},
          {"open_connections", s.open},
          {"unread_responses", s.unread_responses},
          {"accepted", s.accepted},
          {"reaped", s.reaped},
          {"worker_spawns", invoker_->worker_spawns()},
          {"log_written", log_ ? log_->written() : 0},
          {"log_dropped", log_ ? log_->dropped() : 0},
          {"tenant_instances", spawner_ ? spawner_->child_count() : 0}};
}

http::Response ControlPlane::handle(const http::Request& request) {
  const std::string_view path = request.path();
  if (path == "/snafu/stats") {
    if (request.method != "GET") return http::Response::error(405, "method not allowed");
    return http::Response::json(200, stats());
  }

  Route route;
  std::string name;
  if (path.rfind(kInvokePrefix, 0) == 0) {
    if (request.method != "POST") return http::Response::error(405, "method not allowed");
    route = Route::invoke;
    name = http::url_decode(path.substr(kInvokePrefix.size()));
  } else if (path.rfind(kFunctionsPrefix, 0) == 0) {
    std::string_view rest = path.substr(kFunctionsPrefix.size());
    if (rest.empty() || rest == "/") {
      if (request.method == "GET") {
        route = Route::list;
      } else if (request.method == "POST") {
        route = Route::create;
      } else {
        return http::Response::error(405, "method not allowed");
      }
    } else {
      rest.remove_prefix(1);
      const auto slash = rest.find('/');
      name = http::url_decode(rest.substr(0, slash));
      const std::string_view tail = slash == std::string_view::npos ? "" : rest.substr(slash);
      if (tail == "/invocations") {
        if (request.method != "POST") return http::Response::error(405, "method not allowed");
        route = Route::invoke;
      } else if (tail.empty() || tail == "/") {
        if (request.method == "GET") {
          route = Route::get;
        } else if (request.method == "DELETE") {
          route = Route::remove;
        } else {
          return http::Response::error(405, "method not allowed");
        }
      } else {
        return http::Response::error(404, "no such resource");
      }
    }
  } else {
    return http::Response::error(404, "no such resource");
  }

  const AuthOutcome auth = authenticator_->authenticate(request);
  if (!auth.ok()) {
    if (debug_->enabled()) debug_->emit("auth", "rejected: " + auth.reason);
    return http::Response::error(403, auth.reason);
  }
  try {
    return serve(request, route, name, tenant_of(*auth.tenant));
  } catch (const std::exception& e) {
    spdlog::error("{} {}: {}", request.method, request.target, e.what());
    return http::Response::error(500, "internal error");
  }
}

http::Response ControlPlane::serve(const http::Request& request, Route route, const std::string& name,
                                   const std::string& tenant) {
  if (spawner_) {
    std::string base;
    try {
      base = spawner_->endpoint_for(tenant);
    } catch (const SpawnError& e) {
      spdlog::error("{}", e.what());
      return http::Response::error(503, e.what());
    }
    return relay(request, base, route, name, tenant, false);
  }
  if (config_.forward_target) return relay(request, *config_.forward_target, route, name, tenant, true);

  switch (route) {
    case Route::invoke:
      return invoke_local(request, name, tenant);
    case Route::list:
      return list_functions(tenant);
    case Route::get:
      return get_function(name, tenant);
    case Route::create:
      return create_function(request, tenant);
    case Route::remove:
      return delete_function(name, tenant);
  }
  return http::Response::error(404, "no such resource");
}

http::Response ControlPlane::relay(const http::Request& request, const std::string& base, Route route,
                                   const std::string& name, const std::string& tenant, bool add_callback) {
  const auto started_at = std::chrono::system_clock::now();
  const auto started = std::chrono::steady_clock::now();
  auto lease = forward_pool_.acquire(base);
  if (!lease) return http::Response::error(502, "invalid forward target " + base);

  http::Request out;
  out.method = request.method;
  out.target = request.target;
  for (const auto& h : request.headers.items()) {
    if (!hop_by_hop(h.name)) out.headers.add(h.name, h.value);
  }
  if (add_callback) out.headers.set(kCallbackHeader, config_.callback_endpoint);
  out.body = request.body;
  if (debug_->enabled()) debug_->emit("forward", fmt::format("{} {} -> {}", out.method, out.target, base));

  auto sent = (*lease)->send(out);
  if (!sent.response) {
    lease->discard();
    return http::Response::error(502, "forward target unreachable: " + base + " (" + sent.error + ")");
  }
  http::Response response;
  response.status = sent.response->status;
  for (const auto& h : sent.response->headers.items()) {
    if (!hop_by_hop(h.name)) response.headers.add(h.name, h.value);
  }
  response.body = std::move(sent.response->body);

  if (route == Route::invoke) {
    ++forwarded_;
    InvocationRecord rec;
    rec.timestamp = started_at;
    const auto rid = response.headers.get(kRequestIdHeader);
    rec.request_id = rid ? std::string(*rid) : new_request_id();
    rec.tenant = tenant;
    rec.function = name;
    rec.executor = "forward";
    rec.duration_ms = millis_between(started, std::chrono::steady_clock::now());
    rec.status = status_of(response);
    invoker_->record(rec);
  }
  return response;
}

http::Response ControlPlane::invoke_local(const http::Request& request, const std::string& name,
                                          const std::string& tenant) {
  if (const auto type = request.headers.get("X-Amz-Invocation-Type")) {
    if (*type == "Event") return http::Response::error(400, "asynchronous invocation is not supported");
    if (*type != "RequestResponse" && *type != "DryRun") {
      return http::Response::error(400, "unknown invocation type " + std::string(*type));
    }
  }
  nlohmann::json event = nlohmann::json::object();
  if (request.body.find_first_not_of(" \t\r\n") != std::string::npos) {
    event = nlohmann::json::parse(request.body, nullptr, false);
    if (event.is_discarded()) return http::Response::error(400, "request body is not JSON");
  }
  const UnitPtr unit = registry_.resolve(tenant, name);
  if (!unit) return http::Response::error(404, "function not found: " + name);
  if (request.headers.get("X-Amz-Invocation-Type") == std::optional<std::string_view>("DryRun")) {
    http::Response r;
    r.status = 204;
    return r;
  }

  int depth = 0;
  if (const auto d = request.headers.get(kDepthHeader)) {
    auto [ptr, ec] = std::from_chars(d->data(), d->data() + d->size(), depth);
    if (ec != std::errc{} || ptr != d->data() + d->size() || depth < 0) {
      return http::Response::error(400, "bad " + std::string(kDepthHeader) + " header");
    }
  }

  InvocationContext ctx = invoker_->make_context(*unit, {}, depth);
  ctx.tenant = tenant;
  if (const auto cb = request.headers.get(kCallbackHeader)) ctx.invoke_endpoint = std::string(*cb);

  const InvocationResult result = invoker_->invoke(*unit, event, ctx);
  http::Response response;
  if (result.ok()) {
    response = http::Response::json(200, result.value);
  } else if (result.error_type == "ExecutorUnavailable") {
    response = http::Response::error(503, result.error_message);
  } else {
    response = function_error(result);
  }
  response.headers.set(kRequestIdHeader, ctx.request_id);
  return response;
}

http::Response ControlPlane::list_functions(const std::string& tenant) const {
  std::vector<std::string> names = registry_.list(tenant);
  if (tenant != kDefaultTenant) {
    for (auto& n : registry_.list(kDefaultTenant)) {
      if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(std::move(n));
    }
  }
  std::sort(names.begin(), names.end());
  nlohmann::json functions = nlohmann::json::array();
  for (const auto& n : names) {
    if (const auto unit = registry_.resolve(tenant, n)) {
      functions.push_back({{"FunctionName", unit->name},
                           {"Handler", unit->handler},
                           {"Runtime", std::string(to_string(unit->runtime))}});
    }
  }
  return http::Response::json(200, {{"Functions", functions}});
}

http::Response ControlPlane::get_function(const std::string& name, const std::string& tenant) const {
  const UnitPtr unit = registry_.resolve(tenant, name);
  if (!unit) return http::Response::error(404, "function not found: " + name);
  return http::Response::json(200, {{"Configuration", config_json_of(*unit)}});
}

http::Response ControlPlane::create_function(const http::Request& request, const std::string& tenant) {
  nlohmann::json body = nlohmann::json::parse(request.body, nullptr, false);
  if (!body.is_object()) return http::Response::error(400, "request body must be a JSON object");
  if (!body.contains("Code")) return http::Response::error(400, "missing Code");

  std::string code;
  std::string file_name;
  const nlohmann::json code_spec = body["Code"];
  body.erase("Code");
  if (code_spec.is_string()) {
    code = code_spec.get<std::string>();
  } else if (code_spec.is_object() && code_spec.contains("ZipFile") && code_spec["ZipFile"].is_string()) {
    const auto decoded = crypto::base64_decode(code_spec["ZipFile"].get<std::string>());
    if (!decoded) return http::Response::error(400, "Code.ZipFile is not valid base64");
    code = *decoded;
    if (code_spec.contains("FileName") && code_spec["FileName"].is_string()) {
      file_name = code_spec["FileName"].get<std::string>();
    }
  } else {
    return http::Response::error(400, "Code must be a string or {\"ZipFile\": <base64>}");
  }

  FunctionUnit unit;
  try {
    unit = unit_from_config_json(body);
  } catch (const ConfigError& e) {
    return http::Response::error(400, e.what());
  }
  if (!valid_name(unit.name)) return http::Response::error(400, "invalid FunctionName '" + unit.name + "'");
  unit.tenant = tenant;
  if (auto reason = validate(unit)) return http::Response::error(400, *reason);
  if (file_name.empty()) {
    const bool elf = code.size() >= 4 && code.compare(0, 4, "\x7f" "ELF") == 0;
    file_name = unit.handler_file() + (elf ? ".so" : ".src");
  }
  if (file_name.find('/') != std::string::npos || fs::path(file_name).stem() != unit.handler_file()) {
    return http::Response::error(400, "Code.FileName must be <handler file>.<ext>");
  }
  unit.source = file_name;

  std::lock_guard lock(create_mutex_);
  if (registry_.lookup(tenant, unit.name)) {
    return http::Response::error(409, "function already exists: " + unit.name);
  }
  const fs::path dir = created_root_ / tenant / unit.name;
  const fs::path staging = created_root_ / tenant / ("." + unit.name + ".staging");
  std::error_code ec;
  fs::remove_all(staging, ec);
  fs::remove_all(dir, ec);
  fs::create_directories(staging, ec);
  if (ec) return http::Response::error(500, "cannot create " + staging.string() + ": " + ec.message());
  {
    std::ofstream src(staging / file_name, std::ios::binary);
    src << code;
    std::ofstream cfg(staging / "config.json");
    cfg << config_json_of(unit).dump(2) << '\n';
    if (!src || !cfg) return http::Response::error(500, "cannot write function files");
  }
  fs::rename(staging, dir, ec);
  if (ec) return http::Response::error(500, "cannot store function: " + ec.message());

  auto loaded = load_function_dir(dir);
  if (auto* reason = std::get_if<std::string>(&loaded)) {
    fs::remove_all(dir, ec);
    return http::Response::error(400, *reason);
  }
  FunctionUnit stored = std::get<FunctionUnit>(std::move(loaded));
  stored.tenant = tenant;
  const RegisterResult r = registry_.create_unit(stored);
  if (r.status == RegisterStatus::conflict) {
    fs::remove_all(dir, ec);
    return http::Response::error(409, "function already exists: " + unit.name);
  }
  if (!r.ok()) {
    fs::remove_all(dir, ec);
    return http::Response::error(400, r.reason);
  }
  if (debug_->enabled()) debug_->emit("create", fmt::format("{} tenant={} version={}", stored.name, tenant, r.version));
  return http::Response::json(201, config_json_of(stored));
}

http::Response ControlPlane::delete_function(const std::string& name, const std::string& tenant) {
  std::lock_guard lock(create_mutex_);
  if (!registry_.remove(tenant, name)) return http::Response::error(404, "function not found: " + name);
  std::error_code ec;
  fs::remove_all(created_root_ / tenant / name, ec);
  http::Response r;
  r.status = 204;
  return r;
}

InvocationResult ControlPlane::dispatch(const std::string& function, const nlohmann::json& event) {
  http::Request request;
  request.method = "POST";
  request.target = std::string(kFunctionsPrefix) + "/" + function + "/invocations";
  request.headers.set("Host", "127.0.0.1:" + std::to_string(port()));
  request.headers.set("Content-Type", "application/json");
  request.body = event.dump();
  const auto started = std::chrono::steady_clock::now();
  http::Response response;
  try {
    response = serve(request, Route::invoke, function, std::string(kDefaultTenant));
  } catch (const std::exception& e) {
    return InvocationResult::failure(e.what(), 0.0, "InternalError");
  }
  const double ms = millis_between(started, std::chrono::steady_clock::now());
  auto body = nlohmann::json::parse(response.body, nullptr, false);
  if (response.status == 200 && !response.headers.contains(kFunctionErrorHeader) && !body.is_discarded()) {
    return InvocationResult::success(std::move(body), ms);
  }
  std::string message = "HTTP " + std::to_string(response.status);
  std::string type = "FunctionError";
  if (body.is_object()) {
    message = body.value("errorMessage", body.value("message", message));
    type = body.value("errorType", type);
  }
  return InvocationResult::failure(std::move(message), ms, std::move(type));
}

}  // namespace snafu
