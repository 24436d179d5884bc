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

#include "snafu/triggers/fs_trigger.hpp"

#include <fnmatch.h>
#include <poll.h>
#include <sys/eventfd.h>
#include <sys/inotify.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>
#include <system_error>

#include <spdlog/spdlog.h>

#include "snafu/common/error.hpp"

namespace fs = std::filesystem;

namespace snafu {

namespace {

constexpr std::uint32_t kMask = IN_CREATE | IN_MODIFY | IN_CLOSE_WRITE | IN_MOVED_TO |
                                IN_DELETE_SELF | IN_MOVE_SELF | IN_ONLYDIR;

using Clock = std::chrono::steady_clock;

struct PendingEvent {
  std::string kind;
  Clock::time_point last;
};

}  // namespace

bool glob_matches(const std::string& glob, const std::string& file_name) {
  return ::fnmatch(glob.c_str(), file_name.c_str(), FNM_PERIOD) == 0;
}

FsTrigger::FsTrigger(FsWatchSpec spec, Dispatch dispatch, std::chrono::milliseconds debounce)
    : spec_(std::move(spec)), dispatch_(std::move(dispatch)), debounce_(debounce) {
  std::error_code ec;
  if (!fs::is_directory(spec_.path, ec)) {
    throw ConfigError("fs trigger path " + spec_.path.string() + " is not a directory");
  }
}

FsTrigger::~FsTrigger() { stop(); }

void FsTrigger::watch_tree(const fs::path& dir) {
  const int wd = ::inotify_add_watch(inotify_fd_, dir.c_str(), kMask);
  if (wd < 0) {
    spdlog::warn("cannot watch {}: {}", dir.string(), std::strerror(errno));
    return;
  }
  watches_[wd] = dir;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_directory(ec) && !entry.is_symlink(ec)) watch_tree(entry.path());
  }
}

bool FsTrigger::establish() {
  if (inotify_fd_ >= 0) ::close(inotify_fd_);
  watches_.clear();
  inotify_fd_ = ::inotify_init1(IN_NONBLOCK | IN_CLOEXEC);
  if (inotify_fd_ < 0) return false;
  watch_tree(spec_.path);
  return !watches_.empty();
}

void FsTrigger::start() {
  if (running_) return;
  if (!establish()) {
    throw std::system_error(errno, std::generic_category(), "inotify on " + spec_.path.string());
  }
  wake_fd_ = ::eventfd(0, EFD_CLOEXEC | EFD_NONBLOCK);
  running_ = true;
  thread_ = std::thread([this] { run(); });
}

void FsTrigger::stop() {
  if (!running_) return;
  running_ = false;
  const std::uint64_t one = 1;
  [[maybe_unused]] auto n = ::write(wake_fd_, &one, sizeof(one));
  if (thread_.joinable()) thread_.join();
  ::close(wake_fd_);
  ::close(inotify_fd_);
  wake_fd_ = inotify_fd_ = -1;
}

void FsTrigger::run() {
  std::map<std::string, PendingEvent> pending;
  alignas(inotify_event) std::array<char, 16 * 1024> buf{};

  while (running_) {
    int timeout = -1;
    if (!pending.empty()) {
      auto earliest = Clock::time_point::max();
      for (const auto& [path, p] : pending) earliest = std::min(earliest, p.last + debounce_);
      const auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(earliest - Clock::now());
      timeout = static_cast<int>(std::max<std::int64_t>(0, wait.count() + 1));
    }
    std::array<pollfd, 2> fds{pollfd{inotify_fd_, POLLIN, 0}, pollfd{wake_fd_, POLLIN, 0}};
    const int rc = ::poll(fds.data(), fds.size(), timeout);
    if (rc < 0 && errno != EINTR) break;
    if (fds[1].revents != 0) break;

    bool lost = false;
    if (rc > 0 && (fds[0].revents & POLLIN) != 0) {
      while (true) {
        const ssize_t n = ::read(inotify_fd_, buf.data(), buf.size());
        if (n <= 0) break;
        for (ssize_t off = 0; off < n;) {
          const auto* ev = reinterpret_cast<const inotify_event*>(buf.data() + off);
          off += static_cast<ssize_t>(sizeof(inotify_event) + ev->len);
          if ((ev->mask & IN_Q_OVERFLOW) != 0) {
            lost = true;
            continue;
          }
          const auto it = watches_.find(ev->wd);
          if (it == watches_.end()) continue;
          if ((ev->mask & (IN_DELETE_SELF | IN_MOVE_SELF)) != 0 && it->second == spec_.path) {
            lost = true;
            continue;
          }
          if ((ev->mask & IN_IGNORED) != 0) {
            watches_.erase(it);
            continue;
          }
          if (ev->len == 0) continue;
          const fs::path full = it->second / ev->name;
          if ((ev->mask & IN_ISDIR) != 0) {
            if ((ev->mask & (IN_CREATE | IN_MOVED_TO)) != 0) watch_tree(full);
            continue;
          }
          if (!glob_matches(spec_.glob, ev->name)) continue;
          const std::string rel = full.lexically_relative(spec_.path).string();
          const bool created = (ev->mask & (IN_CREATE | IN_MOVED_TO)) != 0;
          auto [p, inserted] = pending.try_emplace(rel, PendingEvent{created ? "created" : "modified", {}});
          if (!inserted && created) p->second.kind = "created";
          p->second.last = Clock::now();
        }
      }
    }
    if (lost) {
      spdlog::warn("filesystem watch on {} lost; re-establishing", spec_.path.string());
      std::error_code ec;
      while (running_ && !(fs::is_directory(spec_.path, ec) && establish())) {
        std::array<pollfd, 1> w{pollfd{wake_fd_, POLLIN, 0}};
        ::poll(w.data(), 1, 1000);
        if (w[0].revents != 0) return;
      }
      continue;
    }

    const auto now = Clock::now();
    for (auto it = pending.begin(); it != pending.end();) {
      if (now - it->second.last < debounce_) {
        ++it;
        continue;
      }
      const nlohmann::json event{{"path", it->first}, {"kind", it->second.kind}};
      it = pending.erase(it);
      try {
        dispatch_(spec_, event);
      } catch (const std::exception& e) {
        spdlog::warn("fs dispatch of {} failed: {}", spec_.target, e.what());
      }
    }
  }
}

}  // namespace snafu
