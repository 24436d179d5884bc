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

#include "snafu/observability/invocation_log.hpp"

#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "snafu/common/error.hpp"

namespace snafu {

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(value);
  std::string out;
  out.reserve(value.size() + 2);
  out.push_back('"');
  for (const char c : value) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string csv_row(const InvocationRecord& r) {
  return fmt::format("{},{},{},{},{},{:.3f},{}", iso8601_millis(r.timestamp), csv_field(r.request_id),
                     csv_field(r.tenant), csv_field(r.function), csv_field(r.executor),
                     r.duration_ms < 0 ? 0.0 : r.duration_ms, to_string(r.status));
}

InvocationLog::InvocationLog(std::filesystem::path path, std::size_t capacity)
    : path_(std::move(path)), capacity_(capacity == 0 ? 1 : capacity) {
  if (path_.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path_.parent_path(), ec);
  }
  file_ = std::fopen(path_.c_str(), "a");
  if (file_ == nullptr) throw ConfigError("cannot open log file " + path_.string());
  if (std::ftell(file_) == 0) {
    std::fputs(std::string(kInvocationCsvHeader).append("\n").c_str(), file_);
    std::fflush(file_);
  }
  writer_ = std::thread([this] { run(); });
}

InvocationLog::~InvocationLog() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
  writer_.join();
  std::fclose(file_);
  if (dropped_ != 0 || failed_ != 0) {
    spdlog::warn("invocation log {}: {} rows dropped, {} rows failed to write", path_.string(),
                 dropped_.load(), failed_.load());
  }
}

void InvocationLog::log(InvocationRecord record) {
  {
    std::lock_guard lock(mutex_);
    if (queue_.size() >= capacity_) {
      ++dropped_;
      return;
    }
    queue_.push_back(std::move(record));
  }
  wake_.notify_one();
}

void InvocationLog::flush() {
  std::unique_lock lock(mutex_);
  drained_.wait(lock, [this] { return queue_.empty() && !busy_; });
}

void InvocationLog::run() {
  std::vector<InvocationRecord> batch;
  std::unique_lock lock(mutex_);
  while (true) {
    wake_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
    if (queue_.empty() && stopping_) break;
    batch.assign(std::make_move_iterator(queue_.begin()), std::make_move_iterator(queue_.end()));
    queue_.clear();
    busy_ = true;
    lock.unlock();

    for (const auto& record : batch) {
      std::string line = csv_row(record);
      line.push_back('\n');
      if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() || std::fflush(file_) != 0) {
        ++failed_;
      } else {
        ++written_;
      }
    }
    batch.clear();

    lock.lock();
    busy_ = false;
    if (queue_.empty()) drained_.notify_all();
  }
  busy_ = false;
  drained_.notify_all();
}

}  // namespace snafu
