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

#include "snafu/triggers/scheduler.hpp"

#include <vector>

#include <spdlog/spdlog.h>

namespace snafu {

CronScheduler::CronScheduler(Dispatch dispatch, Clock clock)
    : dispatch_(std::move(dispatch)), clock_(std::move(clock)) {}

CronScheduler::~CronScheduler() { stop(); }

CronScheduler::Id CronScheduler::add(CronSpec spec) {
  const SystemTime next = cron_next(spec.schedule, clock_());
  std::lock_guard lock(mutex_);
  const Id id = next_id_++;
  entries_.emplace(id, Entry{std::move(spec), next});
  return id;
}

bool CronScheduler::remove(Id id) {
  std::lock_guard lock(mutex_);
  return entries_.erase(id) > 0;
}

std::size_t CronScheduler::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::size_t CronScheduler::tick(SystemTime now) {
  std::vector<CronSpec> due;
  {
    std::lock_guard lock(mutex_);
    for (auto& [id, entry] : entries_) {
      if (entry.next > now) continue;
      due.push_back(entry.spec);
      try {
        entry.next = cron_next(entry.spec.schedule, now);
      } catch (const CronError& e) {
        spdlog::warn("cron '{}' for {}: {}", entry.spec.expression, entry.spec.target, e.what());
        entry.next = SystemTime::max();
      }
    }
  }
  for (const auto& spec : due) {
    try {
      dispatch_(spec);
    } catch (const std::exception& e) {
      spdlog::warn("cron dispatch of {} failed: {}", spec.target, e.what());
    }
  }
  return due.size();
}

void CronScheduler::start(std::chrono::milliseconds interval) {
  std::lock_guard lock(mutex_);
  if (running_) return;
  running_ = true;
  thread_ = std::thread([this, interval] {
    std::unique_lock lock(mutex_);
    while (running_) {
      wake_.wait_for(lock, interval, [this] { return !running_; });
      if (!running_) break;
      lock.unlock();
      tick(clock_());
      lock.lock();
    }
  });
}

void CronScheduler::stop() {
  {
    std::lock_guard lock(mutex_);
    if (!running_) return;
    running_ = false;
  }
  wake_.notify_all();
  if (thread_.joinable()) thread_.join();
}

}  // namespace snafu
