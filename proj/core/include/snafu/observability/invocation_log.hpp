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
#include <condition_variable>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>

#include "snafu/common/time.hpp"
#include "snafu/execution/types.hpp"

namespace snafu {

struct InvocationRecord {
  SystemTime timestamp;
  std::string request_id;
  std::string tenant;
  std::string function;
  std::string executor;
  double duration_ms = 0.0;
  InvocationStatus status = InvocationStatus::ok;
};

inline constexpr std::string_view kInvocationCsvHeader =
    "timestamp,request_id,tenant,function,executor,duration_ms,status";

// RFC 4180 field: quoted when it holds a comma, quote, CR or LF.
std::string csv_field(std::string_view value);
// One row without the line terminator.
std::string csv_row(const InvocationRecord& record);

// Appends one CSV row per record from a single writer thread. Producers
// never block on the file: the queue is bounded and overflow is counted.
class InvocationLog {
 public:
  static constexpr std::size_t kDefaultCapacity = 10000;

  // Throws ConfigError when the file cannot be opened. The header is written
  // only when the file is new or empty.
  explicit InvocationLog(std::filesystem::path path, std::size_t capacity = kDefaultCapacity);
  ~InvocationLog();
  InvocationLog(const InvocationLog&) = delete;
  InvocationLog& operator=(const InvocationLog&) = delete;

  void log(InvocationRecord record);
  // Blocks until every record queued so far is written.
  void flush();

  std::uint64_t written() const { return written_; }
  std::uint64_t dropped() const { return dropped_; }
  std::uint64_t failed() const { return failed_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  void run();

  std::filesystem::path path_;
  std::size_t capacity_;
  std::FILE* file_ = nullptr;

  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable drained_;
  std::deque<InvocationRecord> queue_;
  bool busy_ = false;
  bool stopping_ = false;

  std::atomic<std::uint64_t> written_{0};
  std::atomic<std::uint64_t> dropped_{0};
  std::atomic<std::uint64_t> failed_{0};
  std::thread writer_;
};

}  // namespace snafu
