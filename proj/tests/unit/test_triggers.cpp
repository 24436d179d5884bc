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

#include <atomic>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <gtest/gtest.h>

#include "snafu/triggers/cron.hpp"
#include "snafu/triggers/fs_trigger.hpp"
#include "snafu/triggers/scheduler.hpp"
#include "snafu/triggers/triggers.hpp"
#include "support.hpp"

using namespace snafu;
namespace tk = snafu::testkit;
using std::chrono::minutes;
using tk::utc;

TEST(Cron, EveryMinute) {
  EXPECT_EQ(cron_next(parse_cron("* * * * *"), utc(2026, 5, 4, 12, 0, 30)), utc(2026, 5, 4, 12, 1, 0));
  EXPECT_EQ(cron_next(parse_cron("* * * * *"), utc(2026, 5, 4, 12, 0, 0)), utc(2026, 5, 4, 12, 1, 0));
}

TEST(Cron, NewYear) {
  EXPECT_EQ(cron_next(parse_cron("0 0 1 1 *"), utc(2024, 6, 15)), utc(2025, 1, 1));
}

TEST(Cron, Step) {
  EXPECT_EQ(cron_next(parse_cron("*/15 * * * *"), utc(2026, 5, 4, 12, 7)), utc(2026, 5, 4, 12, 15));
  EXPECT_EQ(cron_next(parse_cron("*/15 * * * *"), utc(2026, 5, 4, 12, 45)), utc(2026, 5, 4, 13, 0));
}

TEST(Cron, DayOfMonthOrDayOfWeekWhenBothRestricted) {
  // 2026-03-01 is a Sunday; the 13th falls on a Friday.
  const auto s = parse_cron("0 9 13 * 5");
  EXPECT_EQ(cron_next(s, utc(2026, 3, 1)), utc(2026, 3, 6, 9));
  EXPECT_EQ(cron_next(s, utc(2026, 3, 12, 10)), utc(2026, 3, 13, 9));
  // An unrestricted day of week keeps day-of-month strict.
  EXPECT_EQ(cron_next(parse_cron("0 9 13 * *"), utc(2026, 3, 1)), utc(2026, 3, 13, 9));
}

TEST(Cron, LeapDay) {
  EXPECT_EQ(cron_next(parse_cron("30 6 29 2 *"), utc(2025, 3, 1)), utc(2028, 2, 29, 6, 30));
}

TEST(Cron, RejectsBadSyntaxAndRanges) {
  for (const char* bad : {"", "* * * *", "* * * * * *", "60 * * * *", "* 24 * * *", "* * 0 * *", "* * 32 * *",
                          "* * * 0 *", "* * * 13 *", "* * * * 7", "*/0 * * * *", "a * * * *", "1,,2 * * * *",
                          "1-5 * * * *", "@daily", "-1 * * * *", "*/ * * * *"}) {
    EXPECT_THROW(parse_cron(bad), CronError) << bad;
  }
}

TEST(Cron, RejectsImpossibleDates) {
  EXPECT_THROW(parse_cron("0 0 30 2 *"), CronError);
  EXPECT_THROW(parse_cron("0 0 31 4,6,9,11 *"), CronError);
  EXPECT_NO_THROW(parse_cron("0 0 31 2,3 *"));
  // With a restricted weekday the OR rule makes it satisfiable.
  EXPECT_NO_THROW(parse_cron("0 0 30 2 1"));
}

TEST(Cron, CronSpecMake) {
  const auto spec = CronSpec::make("*/5 * * * *", "fib", {{"n", 3}});
  EXPECT_EQ(spec.target, "fib");
  EXPECT_EQ(spec.event["n"], 3);
  EXPECT_THROW(CronSpec::make("nope", "fib"), CronError);
}

// Property: agrees with a brute-force minute scan.
TEST(Cron, AgreesWithBruteForceOracle) {
  std::mt19937_64 rng(1979);
  int compared = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto expr = tk::random_cron_expression(rng);
    const auto start = tk::random_time(rng);
    const auto expected = tk::cron_oracle_next(expr, start);
    CronSchedule schedule;
    try {
      schedule = parse_cron(expr);
    } catch (const CronError&) {
      EXPECT_FALSE(expected.has_value()) << expr << " was rejected but fires";
      continue;
    }
    if (!expected) {
      EXPECT_THROW(cron_next(schedule, start), CronError) << expr;
      continue;
    }
    EXPECT_EQ(cron_next(schedule, start), *expected) << expr << " after " << iso8601_millis(start);
    ++compared;
  }
  EXPECT_GT(compared, 900);
}

TEST(Cron, StrictlyIncreasingUnderIteration) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 200; ++i) {
    const auto expr = tk::random_cron_expression(rng);
    CronSchedule s;
    try {
      s = parse_cron(expr);
    } catch (const CronError&) {
      continue;
    }
    auto t = tk::random_time(rng);
    for (int k = 0; k < 5; ++k) {
      SystemTime next;
      try {
        next = cron_next(s, t);
      } catch (const CronError&) {
        break;
      }
      ASSERT_GT(next, t) << expr;
      EXPECT_TRUE(s.matches(next));
      t = next;
    }
  }
}

namespace {

struct FakeClock {
  std::mutex m;
  SystemTime now;
  SystemTime operator()() {
    std::lock_guard l(m);
    return now;
  }
};

}  // namespace

TEST(Scheduler, ThreeMinutesOfEveryMinuteFireThree) {
  auto clock = std::make_shared<FakeClock>();
  clock->now = utc(2026, 1, 1, 10, 0, 10);
  std::vector<std::string> fired;
  CronScheduler sched([&](const CronSpec& s) { fired.push_back(s.target); }, [clock] { return (*clock)(); });
  sched.add(CronSpec::make("* * * * *", "tick"));
  std::size_t total = 0;
  for (int sec = 10; sec <= 190; sec += 5) total += sched.tick(utc(2026, 1, 1, 10, 0, 10) + std::chrono::seconds(sec - 10));
  EXPECT_EQ(total, 3u);
  EXPECT_EQ(fired.size(), 3u);
}

TEST(Scheduler, TwoSpecsSameMinuteBothFire) {
  std::multiset<std::string> fired;
  const auto t0 = utc(2026, 1, 1, 10, 0, 30);
  CronScheduler sched([&](const CronSpec& s) { fired.insert(s.target); }, [t0] { return t0; });
  sched.add(CronSpec::make("1 * * * *", "a"));
  sched.add(CronSpec::make("*/1 10 * * *", "b"));
  EXPECT_EQ(sched.tick(utc(2026, 1, 1, 10, 1)), 2u);
  EXPECT_EQ(fired, (std::multiset<std::string>{"a", "b"}));
}

TEST(Scheduler, RemovedSpecStopsFiring) {
  int fired = 0;
  const auto t0 = utc(2026, 1, 1, 10, 0, 30);
  CronScheduler sched([&](const CronSpec&) { ++fired; }, [t0] { return t0; });
  const auto id = sched.add(CronSpec::make("* * * * *", "x"));
  EXPECT_EQ(sched.tick(utc(2026, 1, 1, 10, 1)), 1u);
  EXPECT_TRUE(sched.remove(id));
  EXPECT_FALSE(sched.remove(id));
  EXPECT_EQ(sched.tick(utc(2026, 1, 1, 10, 5)), 0u);
  EXPECT_EQ(fired, 1);
  EXPECT_EQ(sched.size(), 0u);
}

TEST(Scheduler, FiresOnceAfterLongSleep) {
  int fired = 0;
  const auto t0 = utc(2026, 1, 1, 10, 0, 30);
  CronScheduler sched([&](const CronSpec&) { ++fired; }, [t0] { return t0; });
  sched.add(CronSpec::make("* * * * *", "x"));
  EXPECT_EQ(sched.tick(utc(2026, 1, 1, 12, 0, 30)), 1u);
  EXPECT_EQ(sched.tick(utc(2026, 1, 1, 12, 0, 40)), 0u);
  EXPECT_EQ(sched.tick(utc(2026, 1, 1, 12, 1, 0)), 1u);
  EXPECT_EQ(fired, 2);
}

TEST(Scheduler, ThrowingDispatchDoesNotStopOthers) {
  int ok = 0;
  const auto t0 = utc(2026, 1, 1, 10, 0, 30);
  CronScheduler sched(
      [&](const CronSpec& s) {
        if (s.target == "bad") throw std::runtime_error("boom");
        ++ok;
      },
      [t0] { return t0; });
  sched.add(CronSpec::make("* * * * *", "bad"));
  sched.add(CronSpec::make("* * * * *", "good"));
  EXPECT_EQ(sched.tick(utc(2026, 1, 1, 10, 1)), 2u);
  EXPECT_EQ(ok, 1);
}

TEST(Scheduler, BackgroundThreadUsesClock) {
  auto clock = std::make_shared<FakeClock>();
  clock->now = utc(2026, 1, 1, 10, 0, 30);
  std::atomic<int> fired{0};
  CronScheduler sched([&](const CronSpec&) { ++fired; }, [clock] { return (*clock)(); });
  sched.add(CronSpec::make("* * * * *", "x"));
  sched.start(std::chrono::milliseconds(10));
  {
    std::lock_guard l(clock->m);
    clock->now = utc(2026, 1, 1, 10, 1, 0);
  }
  EXPECT_TRUE(tk::eventually([&] { return fired.load() == 1; }, std::chrono::seconds(2)));
  sched.stop();
}

TEST(Glob, MatchesBaseName) {
  EXPECT_TRUE(glob_matches("*.txt", "a.txt"));
  EXPECT_FALSE(glob_matches("*.txt", "a.bin"));
  EXPECT_TRUE(glob_matches("*", "x"));
  EXPECT_FALSE(glob_matches("*", ".hidden"));
  EXPECT_TRUE(glob_matches("data-?.csv", "data-1.csv"));
}

class FsTriggerTest : public ::testing::Test {
 protected:
  struct Seen {
    std::string path;
    std::string kind;
  };
  tk::TempDir dir;
  std::mutex m;
  std::vector<Seen> seen;

  std::unique_ptr<FsTrigger> make(const std::string& glob) {
    FsWatchSpec spec{dir.path(), glob, "handler"};
    auto t = std::make_unique<FsTrigger>(spec, [this](const FsWatchSpec& s, const nlohmann::json& ev) {
      EXPECT_EQ(s.target, "handler");
      std::lock_guard l(m);
      seen.push_back({ev.at("path").get<std::string>(), ev.at("kind").get<std::string>()});
    });
    t->start();
    return t;
  }
  std::size_t count() {
    std::lock_guard l(m);
    return seen.size();
  }
};

TEST_F(FsTriggerTest, CreatedFileMatchingGlobFiresOnce) {
  auto t = make("*.txt");
  tk::write_text(dir / "a.txt", "hello");
  ASSERT_TRUE(tk::eventually([&] { return count() >= 1; }, std::chrono::seconds(3)));
  std::this_thread::sleep_for(std::chrono::milliseconds(300));
  std::lock_guard l(m);
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_EQ(seen[0].path, "a.txt");
  EXPECT_EQ(seen[0].kind, "created");
}

TEST_F(FsTriggerTest, NonMatchingFileDoesNotFire) {
  auto t = make("*.txt");
  tk::write_text(dir / "a.bin", "x");
  std::this_thread::sleep_for(std::chrono::milliseconds(400));
  EXPECT_EQ(count(), 0u);
}

TEST_F(FsTriggerTest, RapidDoubleWriteIsDebounced) {
  tk::write_text(dir / "b.txt", "0");
  auto t = make("*.txt");
  {
    std::ofstream out(dir / "b.txt", std::ios::app);
    out << "1";
  }
  {
    std::ofstream out(dir / "b.txt", std::ios::app);
    out << "2";
  }
  ASSERT_TRUE(tk::eventually([&] { return count() >= 1; }, std::chrono::seconds(3)));
  std::this_thread::sleep_for(std::chrono::milliseconds(300));
  std::lock_guard l(m);
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_EQ(seen[0].kind, "modified");
}

TEST_F(FsTriggerTest, SubdirectoriesAreWatched) {
  auto t = make("*.txt");
  std::filesystem::create_directories(dir / "in");
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  tk::write_text(dir / "in" / "c.txt", "x");
  ASSERT_TRUE(tk::eventually([&] { return count() >= 1; }, std::chrono::seconds(3)));
  std::lock_guard l(m);
  EXPECT_EQ(seen[0].path, "in/c.txt");
}

TEST(FsTrigger, MissingDirectoryIsConfigError) {
  EXPECT_THROW(FsTrigger({"/nonexistent/snafu/dir", "*", "x"}, [](const FsWatchSpec&, const nlohmann::json&) {}),
               ConfigError);
}

TEST(Triggers, ParseDocument) {
  const auto doc = nlohmann::json::parse(R"({
    "cron": [{"spec": "*/5 * * * *", "target": "fib", "event": {"n": 5}}],
    "fs": [{"path": "inbox", "glob": "*.txt", "target": "echo"}]
  })");
  const auto set = parse_triggers(doc, "/srv/functions");
  ASSERT_EQ(set.cron.size(), 1u);
  EXPECT_EQ(set.cron[0].target, "fib");
  EXPECT_EQ(set.cron[0].event["n"], 5);
  ASSERT_EQ(set.fs.size(), 1u);
  EXPECT_EQ(set.fs[0].path, std::filesystem::path("/srv/functions/inbox"));
  EXPECT_EQ(set.fs[0].glob, "*.txt");
}

TEST(Triggers, ParseErrors) {
  EXPECT_THROW(parse_triggers(nlohmann::json::parse(R"({"cron":[{"spec":"bad","target":"x"}]})"), "/"),
               ConfigError);
  EXPECT_THROW(parse_triggers(nlohmann::json::parse(R"({"cron":[{"spec":"* * * * *"}]})"), "/"), ConfigError);
  EXPECT_THROW(parse_triggers(nlohmann::json::parse(R"({"fs":[{"target":"x"}]})"), "/"), ConfigError);
  EXPECT_THROW(parse_triggers(nlohmann::json::parse("[]"), "/"), ConfigError);
}

TEST(Triggers, MissingFileIsEmpty) {
  tk::TempDir dir;
  const auto set = load_triggers(dir.path());
  EXPECT_TRUE(set.cron.empty());
  EXPECT_TRUE(set.fs.empty());
}

namespace {

ReplBackend fake_backend(std::vector<std::pair<std::string, nlohmann::json>>* calls) {
  ReplBackend b;
  b.invoke = [calls](const std::string& fn, const nlohmann::json& ev) {
    calls->emplace_back(fn, ev);
    if (fn == "helloworld") return InvocationResult::success("Hello, World!");
    if (fn == "fib") return InvocationResult::success(13);
    return InvocationResult::failure("function not found: " + fn, 0.0, "NotFound");
  };
  b.list = [] { return std::vector<std::string>{"fib", "helloworld"}; };
  return b;
}

}  // namespace

TEST(Repl, CallsListsAndQuits) {
  std::vector<std::pair<std::string, nlohmann::json>> calls;
  std::istringstream in("call helloworld {}\ncall fib {\"n\":7}\nlist\nquit\ncall fib {}\n");
  std::ostringstream out;
  EXPECT_EQ(run_repl(in, out, fake_backend(&calls), false), 0);
  EXPECT_EQ(out.str(), "\"Hello, World!\"\n13\nfib\nhelloworld\n");
  ASSERT_EQ(calls.size(), 2u);
  EXPECT_EQ(calls[1].second, nlohmann::json({{"n", 7}}));
}

TEST(Repl, ParseErrorsPrintUsageAndContinue) {
  std::vector<std::pair<std::string, nlohmann::json>> calls;
  std::istringstream in("bogus\ncall fib {not json\ncall\ncall fib\nexit\n");
  std::ostringstream out;
  EXPECT_EQ(run_repl(in, out, fake_backend(&calls), false), 0);
  const std::string text = out.str();
  EXPECT_NE(text.find("usage:"), std::string::npos);
  ASSERT_EQ(calls.size(), 1u);
  EXPECT_EQ(calls[0].second, nlohmann::json::object());
}

TEST(Repl, FunctionErrorsAreReported) {
  std::vector<std::pair<std::string, nlohmann::json>> calls;
  std::istringstream in("call nope {}\n");
  std::ostringstream out;
  EXPECT_EQ(run_repl(in, out, fake_backend(&calls), false), 0);
  EXPECT_EQ(out.str(), "error: NotFound: function not found: nope\n");
}
