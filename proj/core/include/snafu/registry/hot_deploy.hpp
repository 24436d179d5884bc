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

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>

#include "snafu/registry/registry.hpp"

namespace snafu {

struct DeployEvent {
  enum class Kind { registered, rejected, removed };
  Kind kind;
  std::string name;         // unit name, or directory name when rejected
  std::uint64_t version = 0;
  std::string detail;
};

// Watches a functions directory and keeps the registry in sync with it.
// A unit directory is (re)loaded once it has been quiet for `debounce`;
// config.json is expected to be written last. Uses inotify and falls back
// to mtime polling when no watch can be established.
class HotDeployer {
 public:
  struct Options {
    std::chrono::milliseconds debounce{100};
    std::chrono::milliseconds poll_interval{1000};
    bool force_polling = false;
    std::string tenant{kDefaultTenant};
  };

  using Listener = std::function<void(const DeployEvent&)>;

  HotDeployer(Registry& registry, std::filesystem::path root, Options options, Listener listener = {});
  HotDeployer(Registry& registry, std::filesystem::path root)
      : HotDeployer(registry, std::move(root), Options{}) {}
  ~HotDeployer();

  HotDeployer(const HotDeployer&) = delete;
  HotDeployer& operator=(const HotDeployer&) = delete;

  void start();
  void stop();
  bool polling() const { return polling_; }

 private:
  void run_inotify(int inotify_fd, std::map<int, std::string> watches);
  // Directory name -> signature at start.
  void run_polling(std::map<std::string, std::string> signatures);
  void reload(const std::string& dir_name);
  void emit(const DeployEvent& event);
  std::string directory_signature(const std::filesystem::path& dir) const;

  Registry& registry_;
  std::filesystem::path root_;
  Options options_;
  Listener listener_;

  std::thread thread_;
  int wake_fd_ = -1;
  bool polling_ = false;
  bool running_ = false;

  // Directory name -> unit name it currently provides.
  std::map<std::string, std::string> deployed_;
  // Directory name -> last rejection, to warn once per distinct problem.
  std::map<std::string, std::string> rejected_;
};

}  // namespace snafu
