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
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "snafu/auth/authenticator.hpp"
#include "snafu/control/instance_config.hpp"
#include "snafu/control/tenant_spawner.hpp"
#include "snafu/execution/invoker.hpp"
#include "snafu/http/client.hpp"
#include "snafu/http/server.hpp"
#include "snafu/observability/connection_sampler.hpp"
#include "snafu/registry/hot_deploy.hpp"
#include "snafu/registry/registry.hpp"
#include "snafu/triggers/fs_trigger.hpp"
#include "snafu/triggers/scheduler.hpp"

namespace snafu {

// Invoke endpoint a forwarding instance hands to its target for the
// forwarded call ("local" or a URL).
inline constexpr std::string_view kCallbackHeader = "X-Snafu-Callback";
inline constexpr std::string_view kRequestIdHeader = "x-amzn-RequestId";
inline constexpr std::string_view kFunctionErrorHeader = "X-Amz-Function-Error";
// Directory below the functions directory holding functions created
// through the API, one subdirectory per tenant.
inline constexpr const char* kCreatedDir = ".snafu-created";

// Lambda-compatible HTTP service over a registry and an invoker:
//   POST   /2015-03-31/functions/{name}/invocations
//   POST   /invoke/{name}
//   GET    /2015-03-31/functions/
//   GET    /2015-03-31/functions/{name}
//   POST   /2015-03-31/functions
//   DELETE /2015-03-31/functions/{name}
//   GET    /snafu/stats
class ControlPlane {
 public:
  // `executable` starts per-tenant children; defaults to this process's
  // own executable.
  explicit ControlPlane(InstanceConfig config, std::string executable = {});
  ~ControlPlane();
  ControlPlane(const ControlPlane&) = delete;
  ControlPlane& operator=(const ControlPlane&) = delete;

  // Loads functions, starts listening, hot deployment and triggers.
  // Throws ConfigError or std::system_error.
  void start();
  void stop();

  int port() const;
  std::string url() const;

  http::Response handle(const http::Request& request);

  // Trigger entry point: a pre-authenticated call as the default tenant,
  // routed like an HTTP invoke.
  InvocationResult dispatch(const std::string& function, const nlohmann::json& event);

  const InstanceConfig& config() const { return config_; }
  Registry& registry() { return registry_; }
  Invoker& invoker() { return *invoker_; }
  http::Server& server() { return *server_; }
  TenantSpawner* spawner() { return spawner_.get(); }
  InvocationLog* log() { return log_.get(); }
  CronScheduler* scheduler() { return scheduler_.get(); }
  std::uint64_t forwarded_count() const { return forwarded_; }
  nlohmann::json stats() const;

 private:
  enum class Route { invoke, list, get, create, remove };

  http::Response serve(const http::Request& request, Route route, const std::string& name,
                       const std::string& tenant);
  http::Response relay(const http::Request& request, const std::string& base, Route route,
                       const std::string& name, const std::string& tenant, bool add_callback);
  http::Response invoke_local(const http::Request& request, const std::string& name,
                              const std::string& tenant);
  http::Response list_functions(const std::string& tenant) const;
  http::Response get_function(const std::string& name, const std::string& tenant) const;
  http::Response create_function(const http::Request& request, const std::string& tenant);
  http::Response delete_function(const std::string& name, const std::string& tenant);

  void load_functions();
  void start_triggers();
  std::string tenant_of(const std::string& authenticated) const;

  InstanceConfig config_;
  std::string executable_;
  Registry registry_;
  std::shared_ptr<AccountStore> accounts_;
  std::unique_ptr<Authenticator> authenticator_;
  std::shared_ptr<InvocationLog> log_;
  std::shared_ptr<DebugOutput> debug_;
  std::unique_ptr<Invoker> invoker_;
  std::unique_ptr<http::Server> server_;
  http::ConnectionPool forward_pool_;
  std::unique_ptr<TenantSpawner> spawner_;
  std::unique_ptr<HotDeployer> deployer_;
  std::unique_ptr<CronScheduler> scheduler_;
  std::vector<std::unique_ptr<FsTrigger>> fs_triggers_;
  std::unique_ptr<ConnectionSampler> sampler_;
  std::filesystem::path created_root_;
  std::mutex create_mutex_;
  std::atomic<std::uint64_t> forwarded_{0};
  std::atomic<bool> ready_{false};
  bool started_ = false;
};

// Executable next to the running one, or empty when absent.
std::string sibling_executable(const std::string& name);

}  // namespace snafu
