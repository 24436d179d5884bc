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

#include "snafu/triggers/cron.hpp"

#include <charconv>
#include <chrono>
#include <vector>

namespace snafu {

namespace {

using namespace std::chrono;

template <std::size_t N>
bool parse_field(std::string_view text, int lo, int hi, std::bitset<N>& out, std::string_view what,
                 bool& restricted) {
  auto fail = [&](std::string_view why) {
    throw CronError("cron " + std::string(what) + " field '" + std::string(text) + "': " +
                    std::string(why));
  };
  auto number = [&](std::string_view s) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) fail("not a number");
    return v;
  };

  restricted = text.front() != '*';
  if (text == "*") {
    for (int v = lo; v <= hi; ++v) out.set(static_cast<std::size_t>(v));
    return true;
  }
  if (text.substr(0, 2) == "*/") {
    const int step = number(text.substr(2));
    if (step < 1 || step > hi - lo + 1) fail("step out of range");
    for (int v = lo; v <= hi; v += step) out.set(static_cast<std::size_t>(v));
    return true;
  }
  while (!text.empty()) {
    const auto comma = text.find(',');
    const int v = number(text.substr(0, comma));
    if (v < lo || v > hi) fail("value out of range " + std::to_string(lo) + "-" + std::to_string(hi));
    out.set(static_cast<std::size_t>(v));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
    if (text.empty()) fail("trailing comma");
  }
  return true;
}

int days_in_month(int month, bool leap) {
  static constexpr int kDays[] = {0, 31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2 && !leap) return 28;
  return kDays[month];
}

}  // namespace

bool CronSchedule::day_matches(int month, int dom, int dow) const {
  if (!months.test(static_cast<std::size_t>(month))) return false;
  const bool d = days_of_month.test(static_cast<std::size_t>(dom));
  const bool w = days_of_week.test(static_cast<std::size_t>(dow));
  if (dom_restricted && dow_restricted) return d || w;
  return d && w;
}

bool CronSchedule::matches(SystemTime t) const {
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{floor<std::chrono::minutes>(t) - day};
  const int dow = static_cast<int>(weekday{day}.c_encoding());
  return day_matches(static_cast<int>(static_cast<unsigned>(ymd.month())),
                     static_cast<int>(static_cast<unsigned>(ymd.day())), dow) &&
         hours.test(static_cast<std::size_t>(hms.hours().count())) &&
         minutes.test(static_cast<std::size_t>(hms.minutes().count()));
}

CronSchedule parse_cron(std::string_view expression) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < expression.size()) {
    while (i < expression.size() && (expression[i] == ' ' || expression[i] == '\t')) ++i;
    if (i >= expression.size()) break;
    std::size_t j = i;
    while (j < expression.size() && expression[j] != ' ' && expression[j] != '\t') ++j;
    fields.push_back(expression.substr(i, j - i));
    i = j;
  }
  if (fields.size() != 5) {
    throw CronError("cron expression '" + std::string(expression) + "' must have 5 fields, has " +
                    std::to_string(fields.size()));
  }
  CronSchedule s;
  bool ignored = false;
  parse_field(fields[0], 0, 59, s.minutes, "minute", ignored);
  parse_field(fields[1], 0, 23, s.hours, "hour", ignored);
  parse_field(fields[2], 1, 31, s.days_of_month, "day-of-month", s.dom_restricted);
  parse_field(fields[3], 1, 12, s.months, "month", ignored);
  parse_field(fields[4], 0, 6, s.days_of_week, "day-of-week", s.dow_restricted);

  // With both day fields restricted any chosen weekday fires. Otherwise some
  // chosen day of month has to exist in some chosen month, leap years
  // included.
  if (!(s.dom_restricted && s.dow_restricted)) {
    bool possible = false;
    for (int m = 1; m <= 12 && !possible; ++m) {
      if (!s.months.test(static_cast<std::size_t>(m))) continue;
      for (int d = 1; d <= days_in_month(m, true); ++d) {
        if (s.days_of_month.test(static_cast<std::size_t>(d))) {
          possible = true;
          break;
        }
      }
    }
    if (!possible) throw CronError("cron expression '" + std::string(expression) + "' never fires");
  }
  return s;
}

SystemTime cron_next(const CronSchedule& s, SystemTime after) {
  auto t = floor<minutes>(after) + minutes(1);
  const auto limit = t + days(4 * 366);
  while (t <= limit) {
    const auto day = floor<days>(t);
    const year_month_day ymd{day};
    const int month = static_cast<int>(static_cast<unsigned>(ymd.month()));
    if (!s.months.test(static_cast<std::size_t>(month))) {
      const auto next = ymd.year() / ymd.month() / std::chrono::day{1} + std::chrono::months(1);
      t = time_point_cast<minutes>(sys_days{year_month_day{next}});
      continue;
    }
    const int dow = static_cast<int>(weekday{day}.c_encoding());
    if (!s.day_matches(month, static_cast<int>(static_cast<unsigned>(ymd.day())), dow)) {
      t = time_point_cast<minutes>(day + days(1));
      continue;
    }
    const hh_mm_ss hms{t - day};
    if (!s.hours.test(static_cast<std::size_t>(hms.hours().count()))) {
      t = time_point_cast<minutes>(day + hms.hours() + hours(1));
      continue;
    }
    if (!s.minutes.test(static_cast<std::size_t>(hms.minutes().count()))) {
      t += minutes(1);
      continue;
    }
    return time_point_cast<SystemTime::duration>(t);
  }
  throw CronError("cron schedule has no match within four years");
}

CronSpec CronSpec::make(std::string expression, std::string target, nlohmann::json event) {
  CronSpec spec;
  spec.schedule = parse_cron(expression);
  spec.expression = std::move(expression);
  spec.target = std::move(target);
  spec.event = std::move(event);
  return spec;
}

}  // namespace snafu
