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

#include "support.hpp"

#include <stdlib.h>
#include <time.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "snafu/auth/crypto.hpp"
#include "snafu/auth/sigv4.hpp"

namespace fs = std::filesystem;

namespace snafu::testkit {

fs::path fixtures_dir() { return SNAFU_TEST_FIXTURES; }
fs::path samples_dir() { return SNAFU_TEST_SAMPLES; }
std::string control_executable() { return SNAFU_TEST_CONTROL; }
std::string worker_executable() { return SNAFU_TEST_WORKER; }
std::string cli_executable() { return SNAFU_TEST_CLI; }
fs::path plugin_path() { return SNAFU_TEST_PLUGIN; }

TempDir::TempDir() {
  std::string pattern = (fs::temp_directory_path() / "snafu-test-XXXXXX").string();
  if (::mkdtemp(pattern.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool eventually(const std::function<bool()>& pred, std::chrono::milliseconds timeout,
                std::chrono::milliseconds interval) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    if (pred()) return true;
    if (std::chrono::steady_clock::now() >= deadline) return false;
    std::this_thread::sleep_for(interval);
  }
}

void write_unit(const fs::path& root, const std::string& name, const std::string& module,
                const std::string& runtime, int timeout_s) {
  write_text(root / name / (module + ".native"), "module " + module + "\n");
  const nlohmann::json config{
      {"FunctionName", name}, {"Handler", module + "." + name}, {"Runtime", runtime}, {"Timeout", timeout_s}};
  write_text(root / name / "config.json", config.dump(2));
}

std::size_t csv_rows(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) ++n;
  }
  return n == 0 ? 0 : n - 1;
}

namespace {

void fib_rec(int n, FibOracle& acc, std::int64_t& out) {
  ++acc.calls;
  if (n <= 2) {
    out = 1;
    return;
  }
  std::int64_t a = 0;
  std::int64_t b = 0;
  fib_rec(n - 1, acc, a);
  fib_rec(n - 2, acc, b);
  out = a + b;
}

struct OracleField {
  std::vector<bool> allowed;
  bool star = false;
};

OracleField oracle_field(const std::string& text, int lo, int hi) {
  OracleField f;
  f.allowed.assign(static_cast<std::size_t>(hi + 1), false);
  f.star = !text.empty() && text[0] == '*';
  if (text == "*") {
    for (int v = lo; v <= hi; ++v) f.allowed[static_cast<std::size_t>(v)] = true;
  } else if (text.rfind("*/", 0) == 0) {
    const int step = std::stoi(text.substr(2));
    for (int v = lo; v <= hi; v += step) f.allowed[static_cast<std::size_t>(v)] = true;
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) f.allowed[static_cast<std::size_t>(std::stoi(item))] = true;
  }
  return f;
}

}  // namespace

FibOracle fib_oracle(int n) {
  FibOracle acc;
  fib_rec(n, acc, acc.value);
  return acc;
}

SystemTime utc(int year, int month, int day, int hour, int minute, int second) {
  std::tm tm{};
  tm.tm_year = year - 1900;
  tm.tm_mon = month - 1;
  tm.tm_mday = day;
  tm.tm_hour = hour;
  tm.tm_min = minute;
  tm.tm_sec = second;
  return std::chrono::system_clock::from_time_t(::timegm(&tm));
}

std::optional<SystemTime> cron_oracle_next(const std::string& expression, SystemTime after,
                                           std::chrono::hours horizon) {
  std::istringstream in(expression);
  std::string parts[5];
  for (auto& p : parts) in >> p;
  const OracleField minute = oracle_field(parts[0], 0, 59);
  const OracleField hour = oracle_field(parts[1], 0, 23);
  const OracleField dom = oracle_field(parts[2], 1, 31);
  const OracleField month = oracle_field(parts[3], 1, 12);
  const OracleField dow = oracle_field(parts[4], 0, 6);

  std::time_t t = std::chrono::system_clock::to_time_t(after);
  t = t - (t % 60 + 60) % 60 + 60;
  const std::time_t end = std::chrono::system_clock::to_time_t(after + horizon);
  while (t <= end) {
    std::tm tm{};
    ::gmtime_r(&t, &tm);
    const bool dom_ok = dom.allowed[static_cast<std::size_t>(tm.tm_mday)];
    const bool dow_ok = dow.allowed[static_cast<std::size_t>(tm.tm_wday)];
    const bool day_ok = (!dom.star && !dow.star) ? (dom_ok || dow_ok) : (dom_ok && dow_ok);
    if (!day_ok || !month.allowed[static_cast<std::size_t>(tm.tm_mon + 1)]) {
      t += 60 * (60 * (23 - tm.tm_hour) + (60 - tm.tm_min));
      continue;
    }
    if (hour.allowed[static_cast<std::size_t>(tm.tm_hour)] && minute.allowed[static_cast<std::size_t>(tm.tm_min)]) {
      return std::chrono::system_clock::from_time_t(t);
    }
    t += 60;
  }
  return std::nullopt;
}

std::string random_cron_expression(std::mt19937_64& rng) {
  const int lo[5] = {0, 0, 1, 1, 0};
  const int hi[5] = {59, 23, 31, 12, 6};
  std::string out;
  for (int i = 0; i < 5; ++i) {
    std::uniform_int_distribution<int> kind(0, 9);
    std::uniform_int_distribution<int> value(lo[i], hi[i]);
    std::string field;
    const int k = kind(rng);
    if (k < 4) {
      field = "*";
    } else if (k < 6) {
      field = std::to_string(value(rng));
    } else if (k < 8) {
      std::uniform_int_distribution<int> count(2, 3);
      const int c = count(rng);
      for (int j = 0; j < c; ++j) field += (j ? "," : "") + std::to_string(value(rng));
    } else {
      std::uniform_int_distribution<int> step(1, hi[i] - lo[i] + 1);
      field = "*/" + std::to_string(step(rng));
    }
    out += (i ? " " : "") + field;
  }
  return out;
}

SystemTime random_time(std::mt19937_64& rng, int first_year, int last_year) {
  const auto a = std::chrono::system_clock::to_time_t(utc(first_year, 1, 1));
  const auto b = std::chrono::system_clock::to_time_t(utc(last_year, 12, 31, 23, 59, 59));
  std::uniform_int_distribution<std::time_t> pick(a, b);
  return std::chrono::system_clock::from_time_t(pick(rng));
}

http::Request parse_suite_request(const std::string& text) {
  http::Request req;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  const auto first = line.find(' ');
  const auto last = line.rfind(' ');
  req.method = line.substr(0, first);
  req.target = line.substr(first + 1, last - first - 1);
  req.version = line.substr(last + 1);
  bool in_body = false;
  std::string body;
  while (std::getline(in, line)) {
    if (in_body) {
      body += (body.empty() ? "" : "\n") + line;
      continue;
    }
    if (line.empty()) {
      in_body = true;
      continue;
    }
    if ((line[0] == ' ' || line[0] == '\t') && !req.headers.items().empty()) {
      req.headers.items().back().value += "\n" + line;
      continue;
    }
    const auto colon = line.find(':');
    req.headers.add(line.substr(0, colon), line.substr(colon + 1));
  }
  req.body = body;
  return req;
}

namespace {

std::string trim_trailing_newlines(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

std::string with_ext(const fs::path& base, const char* ext) { return base.string() + ext; }

std::string random_token(std::mt19937_64& rng, std::size_t max_len, const std::string& alphabet) {
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string s(len(rng), ' ');
  for (auto& c : s) c = alphabet[pick(rng)];
  return s;
}

const std::string kPathChars = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-_.~";

}  // namespace

std::vector<fs::path> suite_cases() {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(fixtures_dir() / "aws4_testsuite")) {
    if (e.path().extension() == ".req") out.push_back(e.path().parent_path() / e.path().stem());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string suite_case_failure(const fs::path& base) {
  auto request = parse_suite_request(read_text(with_ext(base, ".req")));
  const std::string expected_authz = trim_trailing_newlines(read_text(with_ext(base, ".authz")));
  const auto parsed = sigv4::parse_auth_header(expected_authz);
  if (!parsed) return "unparsable .authz";

  // The session-token case signs a header its .req omits.
  const auto signed_req = parse_suite_request(read_text(with_ext(base, ".sreq")));
  for (const auto& name : parsed->signed_headers) {
    if (request.headers.contains(name)) continue;
    const auto v = signed_req.headers.get(name);
    if (!v) return "signed header " + name + " missing";
    request.headers.add(name, std::string(*v));
  }

  const auto creq = sigv4::canonical_request(request, parsed->signed_headers, crypto::sha256_hex(request.body));
  if (!creq || *creq != trim_trailing_newlines(read_text(with_ext(base, ".creq")))) return "canonical request";
  const auto sts = sigv4::string_to_sign(kSuiteDate, parsed->scope(), *creq);
  if (sts != trim_trailing_newlines(read_text(with_ext(base, ".sts")))) return "string to sign";

  http::Request only_signed = request;
  auto& items = only_signed.headers.items();
  items.erase(std::remove_if(items.begin(), items.end(),
                             [&](const http::Header& h) {
                               std::string lower = h.name;
                               std::transform(lower.begin(), lower.end(), lower.begin(), ::tolower);
                               return std::find(parsed->signed_headers.begin(), parsed->signed_headers.end(),
                                                lower) == parsed->signed_headers.end();
                             }),
              items.end());
  sigv4::SigningParams params;
  params.access_key_id = kSuiteKey;
  params.secret_access_key = kSuiteSecret;
  params.region = "us-east-1";
  params.service = "service";
  params.time = *parse_amz_timestamp(kSuiteDate);
  if (sigv4::authorization_for(only_signed, params) != expected_authz) return "authorization";

  http::Request to_verify = signed_req;
  to_verify.headers.set("Authorization", expected_authz);
  const AccountList accounts({{kSuiteKey, kSuiteSecret, "suite"}});
  const auto v = sigv4::verify_request(to_verify, accounts, *parse_amz_timestamp(kSuiteDate));
  if (!v.ok()) return "verification: " + v.reason;
  return {};
}

http::Request random_signable_request(std::mt19937_64& rng) {
  static const char* methods[] = {"GET", "POST", "PUT", "DELETE"};
  http::Request r;
  r.method = methods[rng() % 4];
  r.target = "/2015-03-31/functions/" + random_token(rng, 20, kPathChars) + "/invocations";
  if (rng() % 2) r.target += "?" + random_token(rng, 6, "abc") + "=" + random_token(rng, 6, kPathChars);
  r.headers.set("Host", "127.0.0.1:" + std::to_string(1024 + rng() % 60000));
  r.headers.set("Content-Type", "application/json");
  r.headers.set("X-Custom-" + random_token(rng, 5, "abcdef"), random_token(rng, 16, kPathChars));
  std::uniform_int_distribution<int> byte(0, 255);
  r.body.resize(rng() % 200);
  for (auto& c : r.body) c = static_cast<char>(byte(rng));
  return r;
}

}  // namespace snafu::testkit
