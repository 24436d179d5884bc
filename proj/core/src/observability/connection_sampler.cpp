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

#include "snafu/observability/connection_sampler.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "snafu/common/error.hpp"

namespace snafu {

ConnectionSampler::ConnectionSampler(Source source, std::chrono::milliseconds interval,
                                     std::filesystem::path csv_path)
    : source_(std::move(source)),
      interval_(std::max(interval, std::chrono::milliseconds(1))),
      csv_path_(std::move(csv_path)) {
  if (!csv_path_.empty()) {
    csv_ = std::fopen(csv_path_.c_str(), "w");
    if (csv_ == nullptr) throw ConfigError("cannot open " + csv_path_.string());
    std::fputs(std::string(kConnectionCsvHeader).append("\n").c_str(), csv_);
    std::fflush(csv_);
  }
}

ConnectionSampler::~ConnectionSampler() {
  stop();
  if (csv_ != nullptr) std::fclose(csv_);
}

void ConnectionSampler::start() {
  std::lock_guard lock(mutex_);
  if (running_) return;
  running_ = true;
  thread_ = std::thread([this] { run(); });
}

void ConnectionSampler::stop() {
  {
    std::lock_guard lock(mutex_);
    if (!running_) return;
    running_ = false;
  }
  wake_.notify_all();
  thread_.join();
}

ConnectionStat ConnectionSampler::sample() {
  ConnectionStat stat = source_();
  stat.unread_response_count = std::min(stat.unread_response_count, stat.open_count);
  std::lock_guard lock(mutex_);
  stat.sample_time = std::chrono::system_clock::now();
  // Sample times are strictly increasing even if the wall clock is not.
  if (!samples_.empty() && stat.sample_time <= last_time_) {
    stat.sample_time = last_time_ + std::chrono::milliseconds(1);
  }
  last_time_ = stat.sample_time;
  samples_.push_back(stat);
  if (csv_ != nullptr) {
    const auto line = fmt::format("{},{},{}\n", iso8601_millis(stat.sample_time), stat.open_count,
                                  stat.unread_response_count);
    std::fputs(line.c_str(), csv_);
    std::fflush(csv_);
  }
  return stat;
}

std::vector<ConnectionStat> ConnectionSampler::samples() const {
  std::lock_guard lock(mutex_);
  return samples_;
}

std::size_t ConnectionSampler::peak_open() const {
  std::lock_guard lock(mutex_);
  std::size_t peak = 0;
  for (const auto& s : samples_) peak = std::max(peak, s.open_count);
  return peak;
}

void ConnectionSampler::run() {
  auto next = std::chrono::steady_clock::now();
  std::unique_lock lock(mutex_);
  while (running_) {
    lock.unlock();
    sample();
    lock.lock();
    next += interval_;
    wake_.wait_until(lock, next, [this] { return !running_; });
  }
}

}  // namespace snafu
