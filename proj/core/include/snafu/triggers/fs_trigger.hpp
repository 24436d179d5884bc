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
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

namespace snafu {

struct FsWatchSpec {
  std::filesystem::path path;
  std::string glob{"*"};
  std::string target;
};

// Watches a directory tree with inotify. A file whose name matches the glob
// produces one dispatch once it has been quiet for the debounce period,
// with event {"path": <path relative to the watched directory>, "kind":
// "created"|"modified"}. A burst that starts with a creation reports
// "created".
class FsTrigger {
 public:
  using Dispatch = std::function<void(const FsWatchSpec&, const nlohmann::json& event)>;

  // Throws ConfigError when the path is not a directory.
  FsTrigger(FsWatchSpec spec, Dispatch dispatch,
            std::chrono::milliseconds debounce = std::chrono::milliseconds(100));
  ~FsTrigger();
  FsTrigger(const FsTrigger&) = delete;
  FsTrigger& operator=(const FsTrigger&) = delete;

  // Throws std::system_error when inotify is unavailable.
  void start();
  void stop();

  const FsWatchSpec& spec() const { return spec_; }

 private:
  void run();
  bool establish();
  void watch_tree(const std::filesystem::path& dir);

  FsWatchSpec spec_;
  Dispatch dispatch_;
  std::chrono::milliseconds debounce_;
  int inotify_fd_ = -1;
  int wake_fd_ = -1;
  std::map<int, std::filesystem::path> watches_;
  std::thread thread_;
  bool running_ = false;
};

// fnmatch(3) of the file name against the glob.
bool glob_matches(const std::string& glob, const std::string& file_name);

}  // namespace snafu
