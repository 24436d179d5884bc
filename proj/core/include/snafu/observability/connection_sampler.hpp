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
#include <condition_variable>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <mutex>
#include <string_view>
#include <thread>
#include <vector>

#include "snafu/common/time.hpp"

namespace snafu {

struct ConnectionStat {
  SystemTime sample_time;
  std::size_t open_count = 0;
  std::size_t unread_response_count = 0;
};

inline constexpr std::string_view kConnectionCsvHeader =
    "sample_time,open_count,unread_response_count";

// Polls a connection count source at a fixed interval, keeps every sample
// and optionally appends them to a CSV file as they are taken.
class ConnectionSampler {
 public:
  // `source` fills the two counts; the sampler sets the time.
  using Source = std::function<ConnectionStat()>;

  ConnectionSampler(Source source, std::chrono::milliseconds interval,
                    std::filesystem::path csv_path = {});
  ~ConnectionSampler();
  ConnectionSampler(const ConnectionSampler&) = delete;
  ConnectionSampler& operator=(const ConnectionSampler&) = delete;

  void start();
  void stop();

  // Takes one sample now.
  ConnectionStat sample();

  std::vector<ConnectionStat> samples() const;
  std::size_t peak_open() const;

 private:
  void run();

  Source source_;
  std::chrono::milliseconds interval_;
  std::filesystem::path csv_path_;
  std::FILE* csv_ = nullptr;

  mutable std::mutex mutex_;
  std::condition_variable wake_;
  std::vector<ConnectionStat> samples_;
  SystemTime last_time_{};
  bool running_ = false;
  std::thread thread_;
};

}  // namespace snafu
