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

#include "snafu/bench/economics.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

#include "snafu/common/error.hpp"

namespace snafu {

double compute_cpm(double cps) {
  if (cps < 0) throw std::invalid_argument("cps must be >= 0");
  return kSecondsPerMonth * cps;
}

double compute_ppm(const Pricing& pricing, double cpm) {
  if (pricing.pph.has_value() == pricing.ppmc.has_value()) {
    throw std::invalid_argument("pricing needs exactly one of pph and ppmc");
  }
  if (pricing.pph) {
    if (*pricing.pph < 0) throw std::invalid_argument("pph must be >= 0");
    return kHoursPerMonth * *pricing.pph;
  }
  if (*pricing.ppmc < 0 || pricing.free_tier_calls < 0) {
    throw std::invalid_argument("ppmc and free tier must be >= 0");
  }
  const double billable = std::max(0.0, cpm - pricing.free_tier_calls);
  return billable * *pricing.ppmc / 1e6;
}

double compute_utility(double cpm, double ppm) {
  if (ppm <= 0) throw std::invalid_argument("ppm must be > 0");
  return cpm / (ppm * 1e6);
}

EconomicsRow evaluate(EconomicsRow row) {
  row.cpm = compute_cpm(row.cps);
  row.ppm = compute_ppm(row.pricing, row.cpm);
  row.utility = compute_utility(row.cpm, row.ppm);
  return row;
}

std::vector<EconomicsRow> parse_prices(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("rows") || !doc["rows"].is_array()) {
    throw ConfigError("prices document needs a \"rows\" array");
  }
  std::vector<EconomicsRow> rows;
  for (const auto& r : doc["rows"]) {
    if (!r.is_object() || !r.contains("label") || !r["label"].is_string() || !r.contains("cps") ||
        !r["cps"].is_number()) {
      throw ConfigError("each price row needs \"label\" and numeric \"cps\"");
    }
    EconomicsRow row;
    row.label = r["label"].get<std::string>();
    row.cps = r["cps"].get<double>();
    for (const char* key : {"pph", "ppmc", "free_tier_calls"}) {
      if (r.contains(key) && !r[key].is_number()) {
        throw ConfigError(row.label + ": \"" + key + "\" must be a number");
      }
    }
    if (r.contains("pph")) row.pricing.pph = r["pph"].get<double>();
    if (r.contains("ppmc")) row.pricing.ppmc = r["ppmc"].get<double>();
    if (r.contains("free_tier_calls")) row.pricing.free_tier_calls = r["free_tier_calls"].get<double>();
    try {
      rows.push_back(evaluate(std::move(row)));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(r["label"].get<std::string>() + ": " + e.what());
    }
  }
  return rows;
}

std::vector<EconomicsRow> load_prices(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  const auto doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError(path + " is not valid JSON");
  return parse_prices(doc);
}

std::string format_economics(const std::vector<EconomicsRow>& rows) {
  std::string out = fmt::format("{:<24} {:>10} {:>14} {:>16} {:>10} {:>9}\n", "configuration", "cps",
                                "cpm", "base price", "ppm", "utility");
  for (const auto& r : rows) {
    const std::string price = r.pricing.pph ? fmt::format("pph: {}", *r.pricing.pph)
                                            : fmt::format("ppmc: {}", *r.pricing.ppmc);
    out += fmt::format("{:<24} {:>10.2f} {:>14.0f} {:>16} {:>10.2f} {:>9.2f}\n", r.label, r.cps, r.cpm, price,
                       r.ppm, r.utility);
  }
  return out;
}

}  // namespace snafu
