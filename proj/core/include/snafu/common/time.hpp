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
#include <optional>
#include <string>
#include <string_view>

namespace snafu {

using SystemTime = std::chrono::system_clock::time_point;
using SteadyTime = std::chrono::steady_clock::time_point;

// "2026-01-02T03:04:05.678Z"
std::string iso8601_millis(SystemTime t);

// "20150830T123600Z", the compact form used by X-Amz-Date.
std::string amz_timestamp(SystemTime t);

// Parses "YYYYMMDDTHHMMSSZ". Returns nullopt on any deviation.
std::optional<SystemTime> parse_amz_timestamp(std::string_view s);

// Parses an RFC 1123 date ("Sun, 30 Aug 2015 12:36:00 GMT").
std::optional<SystemTime> parse_http_date(std::string_view s);

inline double millis_between(SteadyTime start, SteadyTime end) {
  return std::chrono::duration<double, std::milli>(end - start).count();
}

}  // namespace snafu
