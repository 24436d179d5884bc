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

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <thread>

#include "snafu/triggers/cron.hpp"

namespace snafu {

// Fires cron specs. Each spec fires at most once per check even when
// several of its minutes passed since the previous one (host asleep).
class CronScheduler {
 public:
  using Clock = std::function<SystemTime()>;
  using Dispatch = std::function<void(const CronSpec&)>;
  using Id = std::uint64_t;

  explicit CronScheduler(Dispatch dispatch, Clock clock = [] { return std::chrono::system_clock::now(); });
  ~CronScheduler();
  CronScheduler(const CronScheduler&) = delete;
  CronScheduler& operator=(const CronScheduler&) = delete;

  // First fire is the first match after the clock's current time.
  Id add(CronSpec spec);
  bool remove(Id id);
  std::size_t size() const;

  // Fires every spec that is due at `now`; returns how many fired. A
  // throwing dispatch is logged and does not stop the others.
  std::size_t tick(SystemTime now);

  // Background thread checking the clock every `interval`.
  void start(std::chrono::milliseconds interval = std::chrono::milliseconds(1000));
  void stop();

 private:
  struct Entry {
    CronSpec spec;
    SystemTime next;
  };

  Dispatch dispatch_;
  Clock clock_;
  mutable std::mutex mutex_;
  std::condition_variable wake_;
  std::map<Id, Entry> entries_;
  Id next_id_ = 1;
  bool running_ = false;
  std::thread thread_;
};

}  // namespace snafu
