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

#include "snafu/control/tenant_spawner.hpp"

#include <poll.h>
#include <unistd.h>

#include <cstdio>
#include <thread>

#include <spdlog/spdlog.h>

#include "snafu/common/subprocess.hpp"
#include "snafu/control/instance_config.hpp"

namespace snafu {

struct TenantSpawner::Child {
  std::mutex mutex;
  Subprocess proc;
  int port = -1;
  std::thread drain;
  bool launched = false;

  void reap() {
    if (proc.pid() > 0) proc.terminate(std::chrono::milliseconds(2000));
    if (drain.joinable()) drain.join();
    proc = Subprocess{};
    launched = false;
    port = -1;
  }
};

TenantSpawner::TenantSpawner(SpawnerOptions options) : options_(std::move(options)) {}

TenantSpawner::~TenantSpawner() { shutdown(); }

std::shared_ptr<TenantSpawner::Child> TenantSpawner::child(const std::string& tenant) {
  std::lock_guard lock(mutex_);
  if (shut_down_) throw SpawnError("shutting down");
  auto& slot = children_[tenant];
  if (!slot) slot = std::make_shared<Child>();
  return slot;
}

std::string TenantSpawner::endpoint_for(const std::string& tenant) {
  auto c = child(tenant);
  std::lock_guard lock(c->mutex);
  if (c->launched && !c->proc.running()) {
    spdlog::warn("instance for tenant {} exited; starting a new one", tenant);
    c->reap();
    std::lock_guard g(mutex_);
    ++respawns_;
  }
  if (!c->launched) launch(*c, tenant);
  return "http://127.0.0.1:" + std::to_string(c->port);
}

AnnouncedProcess spawn_announced(const std::vector<std::string>& argv, std::chrono::milliseconds timeout,
                                 const std::function<void(std::string_view)>& echo) {
  AnnouncedProcess out;
  Subprocess::Options opts;
  opts.pipe_stdout = true;
  try {
    out.proc = Subprocess::spawn(argv, opts);
  } catch (const std::exception& e) {
    throw SpawnError("cannot start " + argv.front() + ": " + e.what());
  }

  const auto deadline = std::chrono::steady_clock::now() + timeout;
  const std::string banner = std::string(kListeningBanner) + " ";
  std::string buf;
  while (true) {
    const auto nl = buf.find('\n');
    if (nl != std::string::npos) {
      const std::string line = buf.substr(0, nl);
      if (line.rfind(banner, 0) == 0) {
        out.port = std::atoi(line.c_str() + banner.size());
        out.leftover = buf.substr(nl + 1);
        break;
      }
      if (echo) echo(std::string_view(buf).substr(0, nl + 1));
      buf.erase(0, nl + 1);
      continue;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    pollfd pfd{out.proc.stdout_fd(), POLLIN, 0};
    const int rc = left.count() > 0 ? ::poll(&pfd, 1, static_cast<int>(left.count())) : 0;
    char chunk[4096];
    const ssize_t n = rc > 0 ? ::read(out.proc.stdout_fd(), chunk, sizeof(chunk)) : -1;
    if (n <= 0) {
      out.proc.terminate(std::chrono::milliseconds(500));
      throw SpawnError(rc == 0 ? argv.front() + " did not announce a port in time"
                               : argv.front() + " exited during startup");
    }
    buf.append(chunk, static_cast<std::size_t>(n));
  }
  if (out.port <= 0) {
    out.proc.terminate(std::chrono::milliseconds(500));
    throw SpawnError(argv.front() + " announced no port");
  }
  return out;
}

void TenantSpawner::launch(Child& c, const std::string& tenant) {
  std::vector<std::string> argv{options_.executable};
  for (auto& a : options_.args(tenant)) argv.push_back(std::move(a));
  AnnouncedProcess started;
  try {
    started = spawn_announced(argv, options_.startup_timeout, [](std::string_view text) {
      std::fwrite(text.data(), 1, text.size(), stdout);
    });
  } catch (const SpawnError& e) {
    throw SpawnError("instance for tenant " + tenant + ": " + e.what());
  }
  c.proc = std::move(started.proc);
  c.port = started.port;
  const std::string leftover = std::move(started.leftover);

  if (!leftover.empty()) std::fwrite(leftover.data(), 1, leftover.size(), stdout);
  const int fd = c.proc.stdout_fd();
  c.drain = std::thread([fd] {
    char chunk[4096];
    while (true) {
      const ssize_t n = ::read(fd, chunk, sizeof(chunk));
      if (n <= 0) break;
      std::fwrite(chunk, 1, static_cast<std::size_t>(n), stdout);
      std::fflush(stdout);
    }
  });
  c.launched = true;
  spdlog::info("tenant {} served by pid {} on port {}", tenant, c.proc.pid(), c.port);
}

std::optional<pid_t> TenantSpawner::pid_of(const std::string& tenant) const {
  std::shared_ptr<Child> c;
  {
    std::lock_guard lock(mutex_);
    const auto it = children_.find(tenant);
    if (it == children_.end()) return std::nullopt;
    c = it->second;
  }
  std::lock_guard lock(c->mutex);
  if (!c->launched) return std::nullopt;
  return c->proc.pid();
}

std::optional<int> TenantSpawner::port_of(const std::string& tenant) const {
  std::shared_ptr<Child> c;
  {
    std::lock_guard lock(mutex_);
    const auto it = children_.find(tenant);
    if (it == children_.end()) return std::nullopt;
    c = it->second;
  }
  std::lock_guard lock(c->mutex);
  if (!c->launched) return std::nullopt;
  return c->port;
}

std::size_t TenantSpawner::child_count() const {
  std::vector<std::shared_ptr<Child>> children;
  {
    std::lock_guard lock(mutex_);
    for (const auto& [tenant, c] : children_) children.push_back(c);
  }
  std::size_t n = 0;
  for (const auto& c : children) {
    std::lock_guard lock(c->mutex);
    n += c->launched ? 1 : 0;
  }
  return n;
}

std::size_t TenantSpawner::respawn_count() const {
  std::lock_guard lock(mutex_);
  return respawns_;
}

void TenantSpawner::shutdown() {
  std::map<std::string, std::shared_ptr<Child>> children;
  {
    std::lock_guard lock(mutex_);
    shut_down_ = true;
    children.swap(children_);
  }
  for (auto& [tenant, c] : children) {
    std::lock_guard lock(c->mutex);
    c->reap();
  }
}

}  // namespace snafu
