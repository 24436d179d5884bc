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

#include "snafu/registry/hot_deploy.hpp"

#include <poll.h>
#include <sys/eventfd.h>
#include <sys/inotify.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <set>

#include <spdlog/spdlog.h>

namespace fs = std::filesystem;

namespace snafu {

namespace {

constexpr std::uint32_t kRootMask = IN_CREATE | IN_MOVED_TO | IN_DELETE | IN_MOVED_FROM | IN_ONLYDIR;
constexpr std::uint32_t kUnitMask = IN_CLOSE_WRITE | IN_MODIFY | IN_CREATE | IN_MOVED_TO |
                                    IN_DELETE | IN_MOVED_FROM | IN_ATTRIB;

bool ignored_name(const std::string& name) {
  return name.empty() || name.front() == '.' || name.front() == '_';
}

std::vector<std::string> unit_dirs(const fs::path& root) {
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(root, ec)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_directory() && !ignored_name(name)) out.push_back(name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

HotDeployer::HotDeployer(Registry& registry, fs::path root, Options options, Listener listener)
    : registry_(registry),
      root_(std::move(root)),
      options_(std::move(options)),
      listener_(std::move(listener)) {}

HotDeployer::~HotDeployer() { stop(); }

void HotDeployer::start() {
  if (running_) return;
  for (const auto& dir : unit_dirs(root_)) {
    auto loaded = load_function_dir(root_ / dir);
    if (auto* unit = std::get_if<FunctionUnit>(&loaded)) deployed_[dir] = unit->name;
  }

  wake_fd_ = ::eventfd(0, EFD_CLOEXEC | EFD_NONBLOCK);
  int inotify_fd = -1;
  if (!options_.force_polling) {
    inotify_fd = ::inotify_init1(IN_NONBLOCK | IN_CLOEXEC);
    if (inotify_fd >= 0 && ::inotify_add_watch(inotify_fd, root_.c_str(), kRootMask) < 0) {
      ::close(inotify_fd);
      inotify_fd = -1;
    }
  }
  polling_ = inotify_fd < 0;
  if (polling_) {
    spdlog::warn("filesystem notifications unavailable for {}; polling every {} ms", root_.string(),
                 options_.poll_interval.count());
  }
  // Baselines are taken here so nothing created after start() is missed.
  running_ = true;
  if (polling_) {
    std::map<std::string, std::string> signatures;
    for (const auto& name : unit_dirs(root_)) signatures[name] = directory_signature(root_ / name);
    thread_ = std::thread([this, signatures = std::move(signatures)]() mutable {
      run_polling(std::move(signatures));
    });
  } else {
    std::map<int, std::string> watches;
    for (const auto& name : unit_dirs(root_)) {
      const int wd = ::inotify_add_watch(inotify_fd, (root_ / name).c_str(), kUnitMask);
      if (wd >= 0) watches[wd] = name;
    }
    thread_ = std::thread([this, inotify_fd, watches = std::move(watches)]() mutable {
      run_inotify(inotify_fd, std::move(watches));
    });
  }
}

void HotDeployer::stop() {
  if (!running_) return;
  const std::uint64_t one = 1;
  [[maybe_unused]] auto n = ::write(wake_fd_, &one, sizeof(one));
  if (thread_.joinable()) thread_.join();
  ::close(wake_fd_);
  wake_fd_ = -1;
  running_ = false;
}

void HotDeployer::emit(const DeployEvent& event) {
  if (listener_) listener_(event);
}

void HotDeployer::reload(const std::string& dir_name) {
  const fs::path dir = root_ / dir_name;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    auto it = deployed_.find(dir_name);
    if (it != deployed_.end()) {
      registry_.remove(options_.tenant, it->second);
      emit({DeployEvent::Kind::removed, it->second, 0, {}});
      deployed_.erase(it);
    }
    rejected_.erase(dir_name);
    return;
  }

  auto loaded = load_function_dir(dir);
  if (auto* unit = std::get_if<FunctionUnit>(&loaded)) {
    unit->tenant = options_.tenant;
    const std::string name = unit->name;
    const auto result = registry_.register_unit(std::move(*unit));
    if (!result.ok()) {
      emit({DeployEvent::Kind::rejected, dir_name, 0, result.reason});
      return;
    }
    auto prev = deployed_.find(dir_name);
    if (prev != deployed_.end() && prev->second != name) registry_.remove(options_.tenant, prev->second);
    deployed_[dir_name] = name;
    rejected_.erase(dir_name);
    spdlog::info("hot-deployed function {} (version {})", name, result.version);
    emit({DeployEvent::Kind::registered, name, result.version, {}});
    return;
  }

  const auto& reason = std::get<std::string>(loaded);
  if (rejected_[dir_name] != reason) {
    rejected_[dir_name] = reason;
    spdlog::warn("hot deploy skipped {}", reason);
    emit({DeployEvent::Kind::rejected, dir_name, 0, reason});
  }
}

void HotDeployer::run_inotify(int inotify_fd, std::map<int, std::string> watches) {
  using Clock = std::chrono::steady_clock;
  auto watch_dir = [&](const std::string& name) {
    const int wd = ::inotify_add_watch(inotify_fd, (root_ / name).c_str(), kUnitMask);
    if (wd >= 0) watches[wd] = name;
  };
  std::map<std::string, Clock::time_point> pending;
  alignas(inotify_event) std::array<char, 16384> buf{};

  for (;;) {
    int timeout_ms = -1;
    if (!pending.empty()) {
      auto earliest = std::min_element(pending.begin(), pending.end(), [](auto& a, auto& b) {
                        return a.second < b.second;
                      })->second;
      const auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(earliest - Clock::now());
      timeout_ms = static_cast<int>(std::max<std::int64_t>(0, wait.count()));
    }
    std::array<pollfd, 2> fds{{{inotify_fd, POLLIN, 0}, {wake_fd_, POLLIN, 0}}};
    const int rc = ::poll(fds.data(), fds.size(), timeout_ms);
    if (rc < 0 && errno != EINTR) break;
    if (fds[1].revents & POLLIN) break;

    if (fds[0].revents & POLLIN) {
      for (;;) {
        const ssize_t len = ::read(inotify_fd, buf.data(), buf.size());
        if (len <= 0) break;
        for (ssize_t off = 0; off < len;) {
          const auto* ev = reinterpret_cast<const inotify_event*>(buf.data() + off);
          off += static_cast<ssize_t>(sizeof(inotify_event) + ev->len);
          const std::string child = ev->len > 0 ? std::string(ev->name) : std::string{};
          const auto deadline = Clock::now() + options_.debounce;
          auto it = watches.find(ev->wd);
          if (it == watches.end()) {
            // Root directory event.
            if (!(ev->mask & IN_ISDIR) || ignored_name(child)) continue;
            if (ev->mask & (IN_CREATE | IN_MOVED_TO)) watch_dir(child);
            pending[child] = deadline;
          } else if (ev->mask & IN_IGNORED) {
            watches.erase(it);
          } else {
            pending[it->second] = deadline;
          }
        }
      }
    }

    const auto now = Clock::now();
    for (auto it = pending.begin(); it != pending.end();) {
      if (it->second <= now) {
        reload(it->first);
        it = pending.erase(it);
      } else {
        ++it;
      }
    }
  }
  ::close(inotify_fd);
}

std::string HotDeployer::directory_signature(const fs::path& dir) const {
  std::string sig;
  std::error_code ec;
  std::vector<fs::directory_entry> entries;
  for (const auto& e : fs::directory_iterator(dir, ec)) entries.push_back(e);
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.path() < b.path(); });
  for (const auto& e : entries) {
    sig += e.path().filename().string();
    sig += ':';
    sig += std::to_string(e.last_write_time(ec).time_since_epoch().count());
    sig += ':';
    sig += std::to_string(e.is_regular_file(ec) ? e.file_size(ec) : 0);
    sig += ';';
  }
  return sig;
}

void HotDeployer::run_polling(std::map<std::string, std::string> signatures) {
  for (;;) {
    pollfd wake{wake_fd_, POLLIN, 0};
    const int rc = ::poll(&wake, 1, static_cast<int>(options_.poll_interval.count()));
    if (rc > 0) break;

    std::set<std::string> seen;
    for (const auto& name : unit_dirs(root_)) {
      seen.insert(name);
      auto sig = directory_signature(root_ / name);
      auto it = signatures.find(name);
      if (it == signatures.end() || it->second != sig) {
        signatures[name] = std::move(sig);
        reload(name);
      }
    }
    for (auto it = signatures.begin(); it != signatures.end();) {
      if (!seen.count(it->first)) {
        reload(it->first);
        it = signatures.erase(it);
      } else {
        ++it;
      }
    }
  }
}

}  // namespace snafu
