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
#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "snafu/bench/economics.hpp"
#include "snafu/bench/harness.hpp"
#include "snafu/common/error.hpp"
#include "snafu/execution/samples.hpp"
#include "support.hpp"

using namespace snafu;
namespace tk = snafu::testkit;

namespace {

// Published comparison table: label, cps, cpm, ppm, utility.
struct PublishedRow {
  const char* label;
  double cps;
  double cpm;
  double ppm;
  double utility;
};
constexpr PublishedRow kPublishedTable[] = {
    {"AWS Lambda", 99.30, 260965583, 51.99, 5.02},
    {"Snafu IP (a)", 347.19, 912418507, 22.59, 40.39},
    {"Snafu Docker (b)", 281.25, 739126707, 22.59, 32.72},
    {"Snafu Docker (c)", 138.10, 362928625, 22.59, 16.07},
};

double relative_error(double got, double want) { return std::abs(got - want) / std::abs(want); }

BenchResult synthetic(const std::string& label, double cps) {
  BenchResult r;
  r.config_label = label;
  r.cps_median = cps;
  r.cps_values = {cps};
  return r;
}

std::vector<BenchResult> healthy_sweep() {
  return {synthetic("IP", 1000),         synthetic("IP+O+L", 900),       synthetic("IP+AWS4+O", 500),
          synthetic("IIP", 400),         synthetic("IIP+AWS4+O+L", 300), synthetic("EXT-SHARED", 200),
          synthetic("EXT-NONSHARED", 20)};
}

}  // namespace

TEST(Economics, FormulaExamples) {
  EXPECT_DOUBLE_EQ(compute_cpm(0), 0);
  EXPECT_NEAR(compute_cpm(99.30), 260960400, 1e-3);
  EXPECT_NEAR(compute_cpm(347.19), 912415320, 1e-3);
  EXPECT_NEAR(compute_ppm({0.031, std::nullopt, 0}, 0), 22.63, 1e-9);
  EXPECT_DOUBLE_EQ(compute_ppm({0.0, std::nullopt, 0}, 0), 0);
  EXPECT_NEAR(compute_ppm({std::nullopt, 0.20, 1e6}, 260965583), 51.99, 0.005);
  EXPECT_DOUBLE_EQ(compute_ppm({std::nullopt, 0.20, 1e6}, 5e5), 0);
  EXPECT_NEAR(compute_utility(260965583, 51.99), 5.02, 0.005);
  EXPECT_NEAR(compute_utility(912418507, 22.59), 40.39, 0.005);
  EXPECT_DOUBLE_EQ(compute_utility(0, 1), 0);
}

TEST(Economics, Errors) {
  EXPECT_THROW(compute_cpm(-1), std::invalid_argument);
  EXPECT_THROW(compute_ppm({1.0, 1.0, 0}, 0), std::invalid_argument);
  EXPECT_THROW(compute_ppm({std::nullopt, std::nullopt, 0}, 0), std::invalid_argument);
  EXPECT_THROW(compute_utility(1, 0), std::invalid_argument);
  EXPECT_THROW(compute_utility(1, -2), std::invalid_argument);
}

TEST(Economics, SamplePricesReproducePublishedTable) {
  const auto rows = load_prices((tk::samples_dir() / "prices.json").string());
  ASSERT_EQ(rows.size(), std::size(kPublishedTable));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& want = kPublishedTable[i];
    EXPECT_EQ(rows[i].label, want.label);
    EXPECT_DOUBLE_EQ(rows[i].cps, want.cps);
    EXPECT_LT(relative_error(rows[i].cpm, want.cpm), 0.005) << want.label;
    EXPECT_LT(relative_error(rows[i].ppm, want.ppm), 0.005) << want.label;
    EXPECT_LT(relative_error(rows[i].utility, want.utility), 0.005) << want.label;
  }
  const auto text = format_economics(rows);
  for (const auto& want : kPublishedTable) EXPECT_NE(text.find(want.label), std::string::npos);
}

TEST(Economics, ParsePricesErrors) {
  EXPECT_THROW(parse_prices(nlohmann::json::array()), ConfigError);
  EXPECT_THROW(parse_prices({{"rows", 3}}), ConfigError);
  EXPECT_THROW(parse_prices({{"rows", {{{"cps", 1}, {"pph", 1}}}}}), ConfigError);
  EXPECT_THROW(parse_prices({{"rows", {{{"label", "x"}, {"cps", 1}}}}}), ConfigError);
  EXPECT_THROW(parse_prices({{"rows", {{{"label", "x"}, {"cps", 1}, {"pph", 1}, {"ppmc", 1}}}}}), ConfigError);
  EXPECT_THROW(parse_prices({{"rows", {{{"label", "x"}, {"cps", -1}, {"pph", 1}}}}}), ConfigError);
  EXPECT_THROW(parse_prices({{"rows", {{{"label", "x"}, {"cps", 1}, {"pph", "cheap"}}}}}), ConfigError);
  EXPECT_THROW(load_prices("/nonexistent/prices.json"), ConfigError);
}

TEST(Stats, MedianAndMean) {
  EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2);
  EXPECT_DOUBLE_EQ(median({4, 1, 3, 2}), 2.5);
  EXPECT_DOUBLE_EQ(mean({1, 2, 3, 4}), 2.5);
  EXPECT_DOUBLE_EQ(median({7}), 7);
}

TEST(Ordering, HealthySweepPasses) { EXPECT_TRUE(check_ordering(healthy_sweep()).empty()); }

TEST(Ordering, TiesWithinToleranceAreAllowed) {
  auto results = healthy_sweep();
  results[3].cps_median = 520;  // IIP 4% above IP+AWS4+O
  EXPECT_TRUE(check_ordering(results).empty());
  results[3].cps_median = 530;  // 6% above
  const auto problems = check_ordering(results);
  ASSERT_EQ(problems.size(), 1u);
  EXPECT_NE(problems[0].find("IIP"), std::string::npos);
}

TEST(Ordering, ExternalRatio) {
  auto results = healthy_sweep();
  results[6].cps_median = 150;
  const auto problems = check_ordering(results);
  ASSERT_EQ(problems.size(), 1u);
  EXPECT_NE(problems[0].find("EXT-SHARED"), std::string::npos);
}

TEST(Ordering, MissingAndFailedAreReported) {
  auto results = healthy_sweep();
  results.erase(results.begin() + 1);
  results[0].failed = true;
  results[0].error = "boom";
  const auto problems = check_ordering(results);
  EXPECT_EQ(problems.size(), 2u);
}

TEST(Sweep, DefaultConfigsAndLabels) {
  std::vector<std::string> labels;
  for (const auto& c : default_sweep_configs()) labels.push_back(c.label());
  EXPECT_EQ(labels, (std::vector<std::string>{"IP", "IP+O+L", "IP+AWS4+O", "IIP", "IIP+AWS4+O+L", "EXT-SHARED",
                                              "EXT-NONSHARED"}));
}

TEST(Sweep, CsvAndSummary) {
  tk::TempDir dir;
  auto results = healthy_sweep();
  results[0].cps_values = {900, 1000, 1100};
  write_sweep_csv(dir / "sweep.csv", results);
  EXPECT_EQ(tk::csv_rows(dir / "sweep.csv"), 9u);
  const auto text = tk::read_text(dir / "sweep.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "config_label,fib_n,rep,cps");
  const auto summary = format_sweep_summary(results);
  EXPECT_NE(summary.find("EXT-NONSHARED"), std::string::npos);
}

TEST(Harness, FibValues) {
  for (int n = 1; n <= 25; ++n) {
    EXPECT_EQ(fib_value(n), tk::fib_oracle(n).value) << n;
    EXPECT_EQ(fib_call_count(n), tk::fib_oracle(n).calls) << n;
  }
  EXPECT_EQ(fib_call_count(20), 13529);
}

TEST(Harness, MeasureValidatesAgainstOracle) {
  tk::TempDir dir;
  HostSpec spec;
  spec.control_executable = tk::control_executable();
  spec.worker_executable = tk::worker_executable();
  spec.work_dir = dir.path();
  prepare_work_dir(spec);
  ExecutorConfig config;
  config.logging = true;
  config.debug_output = true;
  config.authentication = true;
  const auto r = measure_cps(spec, config, 12, 2);
  EXPECT_EQ(r.config_label, "IP+AWS4+O+L");
  EXPECT_EQ(r.total_calls, 287);
  ASSERT_EQ(r.cps_values.size(), 2u);
  EXPECT_GT(r.cps_median, 0);
  EXPECT_FALSE(r.failed);
}
