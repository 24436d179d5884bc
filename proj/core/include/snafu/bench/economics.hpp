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

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace snafu {

// (365 / 12) * 24 * 3600
inline constexpr double kSecondsPerMonth = 2'628'000.0;
// (365 / 12) * 24
inline constexpr double kHoursPerMonth = 730.0;

// Exactly one of pph (price per hour) and ppmc (price per million calls).
struct Pricing {
  std::optional<double> pph;
  std::optional<double> ppmc;
  double free_tier_calls = 0.0;
};

struct EconomicsRow {
  std::string label;
  double cps = 0.0;
  Pricing pricing;
  double cpm = 0.0;
  double ppm = 0.0;
  double utility = 0.0;
};

// Calls per month at a sustained `cps`. Throws std::invalid_argument when
// negative.
double compute_cpm(double cps);
// Price per month; `cpm` matters only for per-call pricing. Throws
// std::invalid_argument unless exactly one basis is set.
double compute_ppm(const Pricing& pricing, double cpm);
// cpm / (ppm * 10^6). Throws std::invalid_argument when ppm <= 0.
double compute_utility(double cpm, double ppm);

// Fills cpm, ppm and utility from label, cps and pricing.
EconomicsRow evaluate(EconomicsRow row);

// {"rows": [{"label", "cps", "pph" | "ppmc", "free_tier_calls"?}]}.
// Throws ConfigError.
std::vector<EconomicsRow> parse_prices(const nlohmann::json& doc);
std::vector<EconomicsRow> load_prices(const std::string& path);

std::string format_economics(const std::vector<EconomicsRow>& rows);

}  // namespace snafu
