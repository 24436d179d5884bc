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

#include <bitset>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "snafu/common/error.hpp"
#include "snafu/common/time.hpp"

namespace snafu {

class CronError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Five fields: minute hour day-of-month month day-of-week. Each is "*", a
// number, a comma list of numbers, or "*/k". Times are UTC. When both day
// fields are restricted a day matches if either does; a field written with
// a leading '*' counts as unrestricted.
struct CronSchedule {
  std::bitset<60> minutes;
  std::bitset<24> hours;
  std::bitset<32> days_of_month;  // bit 0 unused
  std::bitset<13> months;         // bit 0 unused
  std::bitset<7> days_of_week;    // 0 = Sunday
  bool dom_restricted = false;
  bool dow_restricted = false;

  bool matches(SystemTime t) const;
  bool day_matches(int month, int day_of_month, int day_of_week) const;
};

// Throws CronError on syntax errors, out-of-range values and schedules
// that can never fire (such as February 30).
CronSchedule parse_cron(std::string_view expression);

// Smallest whole minute strictly after `after` matching the schedule.
// Throws CronError when nothing matches within four years.
SystemTime cron_next(const CronSchedule& schedule, SystemTime after);

struct CronSpec {
  std::string expression;
  CronSchedule schedule;
  std::string target;
  nlohmann::json event = nlohmann::json::object();

  // Parses the expression; throws CronError.
  static CronSpec make(std::string expression, std::string target,
                       nlohmann::json event = nlohmann::json::object());
};

}  // namespace snafu
