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

#include <sys/types.h>

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "snafu/common/subprocess.hpp"

namespace snafu {

class SpawnError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A host process that printed "SNAFU_LISTENING <port>" on its standard
// output, which stays piped. `leftover` holds output read past the banner.
struct AnnouncedProcess {
  Subprocess proc;
  int port = -1;
  std::string leftover;
};

// Starts `argv` and waits for its banner. Output before the banner goes to
// `echo` when set. Throws SpawnError.
AnnouncedProcess spawn_announced(const std::vector<std::string>& argv, std::chrono::milliseconds timeout,
                                 const std::function<void(std::string_view)>& echo = {});

struct SpawnerOptions {
  std::string executable;
  // Arguments of the child serving `tenant`.
  std::function<std::vector<std::string>(const std::string& tenant)> args;
  std::chrono::milliseconds startup_timeout{10000};
};

// One child host process per tenant, started on the tenant's first request.
// The child prints "SNAFU_LISTENING <port>" once it serves; its remaining
// standard output is copied to ours. A child found dead is started again on
// the next request for its tenant.
class TenantSpawner {
 public:
  explicit TenantSpawner(SpawnerOptions options);
  ~TenantSpawner();
  TenantSpawner(const TenantSpawner&) = delete;
  TenantSpawner& operator=(const TenantSpawner&) = delete;

  // Base URL of the tenant's child. Calls for one tenant are serialized.
  // Throws SpawnError.
  std::string endpoint_for(const std::string& tenant);

  std::optional<pid_t> pid_of(const std::string& tenant) const;
  std::optional<int> port_of(const std::string& tenant) const;
  std::size_t child_count() const;
  std::size_t respawn_count() const;

  // Terminates every child.
  void shutdown();

 private:
  struct Child;
  std::shared_ptr<Child> child(const std::string& tenant);
  void launch(Child& child, const std::string& tenant);

  SpawnerOptions options_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Child>> children_;
  std::size_t respawns_ = 0;
  bool shut_down_ = false;
};

}  // namespace snafu
