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

#include "snafu/bench/harness.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "snafu/auth/sigv4.hpp"
#include "snafu/common/error.hpp"
#include "snafu/control/instance_config.hpp"
#include "snafu/execution/samples.hpp"

namespace fs = std::filesystem;

namespace snafu {

namespace {

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

void write_unit(const fs::path& root, const std::string& name, const std::string& module,
                const std::string& description) {
  const nlohmann::json config{{"FunctionName", name},
                              {"Handler", module + "." + name},
                              {"Runtime", "native"},
                              {"Timeout", 600}};
  write_file(root / name / (module + ".native"), description + "\n");
  write_file(root / name / "config.json", config.dump(2) + "\n");
}

std::size_t count_rows(const fs::path& csv) {
  std::ifstream in(csv);
  std::size_t lines = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) ++lines;
  }
  return lines == 0 ? 0 : lines - 1;
}

std::string file_label(std::string label) {
  for (char& c : label) {
    if (c == '+') c = '_';
  }
  return label;
}

}  // namespace

Account bench_account() { return {"AKIDSNAFUBENCH", "snafu-bench-secret-key", "bench"}; }

void prepare_work_dir(const HostSpec& spec) {
  const fs::path f = spec.functions_dir();
  write_unit(f, "fib", "fib", "native module fib: fib(n), fib_delay(n)");
  write_unit(f, "fib_delay", "fib", "native module fib: fib(n), fib_delay(n)");
  write_unit(f, "counter", "counter", "native module counter: counter()");
  write_unit(f, "helloworld", "hello", "native module hello: helloworld()");
  write_unit(f, "echo", "util", "native module util: echo(event), fail(message), sleep(ms)");
  const Account a = bench_account();
  const nlohmann::json accounts = nlohmann::json::array(
      {{{"access_key_id", a.access_key_id}, {"secret_access_key", a.secret_access_key}, {"tenant", a.tenant}}});
  write_file(spec.accounts_file(), accounts.dump(2) + "\n");
}

std::int64_t fib_value(std::int64_t n) {
  std::int64_t a = 1;
  std::int64_t b = 1;
  for (std::int64_t i = 2; i < n; ++i) {
    const std::int64_t c = a + b;
    a = b;
    b = c;
  }
  return b;
}

HostProcess::HostProcess(const HostSpec& spec, const std::vector<std::string>& args,
                         const fs::path& output_file) {
  std::vector<std::string> argv{spec.control_executable};
  argv.insert(argv.end(), args.begin(), args.end());
  auto started = spawn_announced(argv, spec.startup_timeout);
  proc_ = std::move(started.proc);
  port_ = started.port;
  const int fd = proc_.stdout_fd();
  drain_ = std::thread([fd, output_file, leftover = std::move(started.leftover)] {
    std::FILE* out = output_file.empty() ? nullptr : std::fopen(output_file.c_str(), "w");
    if (out != nullptr) std::fwrite(leftover.data(), 1, leftover.size(), out);
    char chunk[16384];
    while (true) {
      const ssize_t n = ::read(fd, chunk, sizeof(chunk));
      if (n <= 0) break;
      if (out != nullptr) std::fwrite(chunk, 1, static_cast<std::size_t>(n), out);
    }
    if (out != nullptr) std::fclose(out);
  });
}

HostProcess::~HostProcess() { stop(); }

void HostProcess::stop() {
  if (proc_.pid() > 0) proc_.terminate(std::chrono::milliseconds(10000));
  if (drain_.joinable()) drain_.join();
}

std::vector<std::string> bench_host_args(const HostSpec& spec, const ExecutorConfig& executor,
                                         const fs::path& log_file) {
  std::vector<std::string> args{"--port",          "0",
                                "--bind",          "127.0.0.1",
                                "--announce",      "--functions-dir",
                                spec.functions_dir().string(),
                                "--executor",      executor_flag(executor),
                                "--callback",      std::string(kSelfEndpoint),
                                "--authenticator", executor.authentication ? "aws4" : "none",
                                "--accounts",      spec.accounts_file().string()};
  if (!spec.worker_executable.empty()) args.insert(args.end(), {"--worker", spec.worker_executable});
  if (executor.debug_output) args.emplace_back("--debug");
  if (executor.logging) args.insert(args.end(), {"--logger", "csv", "--log-file", log_file.string()});
  return args;
}

BenchClient::BenchClient(const std::string& url, bool sign)
    : url_(url), sign_(sign), client_(*http::Endpoint::parse(url), std::chrono::minutes(10)) {}

http::Client::Result BenchClient::invoke(const std::string& function, const nlohmann::json& event) {
  http::Request req;
  req.method = "POST";
  req.target = "/2015-03-31/functions/" + function + "/invocations";
  const auto& ep = client_.endpoint();
  req.headers.set("Host", ep.host + ":" + std::to_string(ep.port));
  req.headers.set("Content-Type", "application/json");
  req.body = event.dump();
  if (sign_) {
    const Account a = bench_account();
    sigv4::SigningParams p;
    p.access_key_id = a.access_key_id;
    p.secret_access_key = a.secret_access_key;
    sigv4::sign_request(req, p);
  }
  return client_.send(req);
}

nlohmann::json BenchClient::stats() {
  http::Request req;
  req.method = "GET";
  req.target = "/snafu/stats";
  auto r = client_.send(req);
  if (!r.response || r.response->status != 200) throw std::runtime_error("stats unavailable: " + r.error);
  return nlohmann::json::parse(r.response->body);
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

double mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

BenchResult measure_cps(const HostSpec& spec, const ExecutorConfig& executor, int fib_n, int repetitions) {
  BenchResult result;
  result.config_label = executor.label();
  result.fib_n = fib_n;
  result.repetitions = repetitions;
  result.total_calls = fib_call_count(fib_n);
  const std::int64_t expected = fib_value(fib_n);

  for (int rep = 1; rep <= repetitions; ++rep) {
    const fs::path log = spec.work_dir / fmt::format("log-{}-rep{}.csv", file_label(result.config_label), rep);
    std::error_code ec;
    fs::remove(log, ec);
    HostProcess host(spec, bench_host_args(spec, executor, log),
                     spec.work_dir / fmt::format("host-{}.out", file_label(result.config_label)));
    BenchClient client(host.url(), executor.authentication);

    const auto t0 = std::chrono::steady_clock::now();
    const auto sent = client.invoke("fib", {{"n", fib_n}});
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (!sent.response) throw BenchInvalid(result.config_label + ": invoke failed: " + sent.error);
    const auto& resp = *sent.response;
    if (resp.status != 200 || resp.headers.contains("X-Amz-Function-Error")) {
      throw BenchInvalid(fmt::format("{}: fib({}) answered HTTP {}: {}", result.config_label, fib_n, resp.status,
                                     resp.body));
    }
    if (resp.body != std::to_string(expected)) {
      throw BenchInvalid(fmt::format("{}: fib({}) returned {}, expected {}", result.config_label, fib_n, resp.body,
                                     expected));
    }
    const auto stats = client.stats();
    const auto executed = stats.at("executed").get<std::int64_t>();
    host.stop();
    if (executed != result.total_calls) {
      throw BenchInvalid(fmt::format("{}: {} calls executed, oracle says {}", result.config_label, executed,
                                     result.total_calls));
    }
    if (executor.logging) {
      const std::size_t rows = count_rows(log);
      if (static_cast<std::int64_t>(rows) != result.total_calls) {
        throw BenchInvalid(fmt::format("{}: {} log rows, oracle says {}", result.config_label, rows,
                                       result.total_calls));
      }
    }
    const double cps = static_cast<double>(result.total_calls) / seconds;
    if (!(cps > 0)) throw BenchInvalid(result.config_label + ": non-positive cps");
    result.cps_values.push_back(cps);
  }
  result.cps_median = median(result.cps_values);
  result.cps_mean = mean(result.cps_values);
  return result;
}

std::vector<ExecutorConfig> default_sweep_configs() {
  ExecutorConfig ip;
  ExecutorConfig ip_ol = ip;
  ip_ol.debug_output = ip_ol.logging = true;
  ExecutorConfig ip_oa = ip;
  ip_oa.debug_output = ip_oa.authentication = true;
  ExecutorConfig iip;
  iip.isolation = true;
  ExecutorConfig iip_all = iip;
  iip_all.debug_output = iip_all.logging = iip_all.authentication = true;
  ExecutorConfig ext_shared;
  ext_shared.kind = RuntimeKind::external_shared;
  ExecutorConfig ext_nonshared;
  ext_nonshared.kind = RuntimeKind::external_nonshared;
  return {ip, ip_ol, ip_oa, iip, iip_all, ext_shared, ext_nonshared};
}

std::vector<BenchResult> config_sweep(const HostSpec& spec, int fib_n, int repetitions,
                                      const std::vector<ExecutorConfig>& configs, const Progress& progress) {
  std::vector<BenchResult> results;
  for (const auto& c : configs) {
    BenchResult r;
    try {
      r = measure_cps(spec, c, fib_n, repetitions);
      if (progress) progress(fmt::format("{:<16} median {:>10.2f} cps", r.config_label, r.cps_median));
    } catch (const std::exception& e) {
      r.config_label = c.label();
      r.fib_n = fib_n;
      r.repetitions = repetitions;
      r.total_calls = fib_call_count(fib_n);
      r.failed = true;
      r.error = e.what();
      if (progress) progress(fmt::format("{:<16} FAILED: {}", r.config_label, r.error));
    }
    results.push_back(std::move(r));
  }
  return results;
}

std::vector<std::string> check_ordering(const std::vector<BenchResult>& results, double tie_tolerance,
                                        double ext_ratio) {
  std::vector<std::string> problems;
  auto find = [&](const std::string& label) -> const BenchResult* {
    for (const auto& r : results) {
      if (r.config_label == label) {
        if (r.failed) {
          problems.push_back(label + " failed: " + r.error);
          return nullptr;
        }
        return &r;
      }
    }
    problems.push_back(label + " missing");
    return nullptr;
  };
  const std::vector<std::string> chain{"IP", "IP+O+L", "IP+AWS4+O", "IIP", "IIP+AWS4+O+L"};
  std::vector<const BenchResult*> found;
  for (const auto& label : chain) found.push_back(find(label));
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    if (found[i] == nullptr || found[i + 1] == nullptr) continue;
    if (found[i + 1]->cps_median > found[i]->cps_median * (1.0 + tie_tolerance)) {
      problems.push_back(fmt::format("{} ({:.2f}) should not exceed {} ({:.2f})", chain[i + 1],
                                     found[i + 1]->cps_median, chain[i], found[i]->cps_median));
    }
  }
  const BenchResult* shared = find("EXT-SHARED");
  const BenchResult* nonshared = find("EXT-NONSHARED");
  if (shared != nullptr && nonshared != nullptr && shared->cps_median < ext_ratio * nonshared->cps_median) {
    problems.push_back(fmt::format("EXT-SHARED ({:.2f}) should be at least {}x EXT-NONSHARED ({:.2f})",
                                   shared->cps_median, ext_ratio, nonshared->cps_median));
  }
  return problems;
}

void write_sweep_csv(const fs::path& path, const std::vector<BenchResult>& results) {
  std::string out = "config_label,fib_n,rep,cps\n";
  for (const auto& r : results) {
    for (std::size_t i = 0; i < r.cps_values.size(); ++i) {
      out += fmt::format("{},{},{},{:.4f}\n", r.config_label, r.fib_n, i + 1, r.cps_values[i]);
    }
  }
  write_file(path, out);
}

std::string format_sweep_summary(const std::vector<BenchResult>& results) {
  std::string out = fmt::format("{:<16} {:>6} {:>5} {:>8} {:>12} {:>12}\n", "configuration", "fib_n", "reps",
                                "calls", "median cps", "mean cps");
  for (const auto& r : results) {
    if (r.failed) {
      out += fmt::format("{:<16} {:>6} {:>5} {:>8} failed: {}\n", r.config_label, r.fib_n, r.repetitions,
                         r.total_calls, r.error);
      continue;
    }
    out += fmt::format("{:<16} {:>6} {:>5} {:>8} {:>12.2f} {:>12.2f}\n", r.config_label, r.fib_n, r.repetitions,
                       r.total_calls, r.cps_median, r.cps_mean);
  }
  return out;
}

namespace {

struct ClientOutcome {
  bool reader = false;
  bool ok = false;
  bool send_failed = false;
};

int connect_loopback(int port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) return -1;
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd);
    return -1;
  }
  return fd;
}

// Reads one response; true when it is a 200 with exactly `expected` as body.
bool read_response(int fd, const std::string& expected) {
  timeval tv{10, 0};
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  std::string buf;
  char chunk[4096];
  std::size_t header_end = std::string::npos;
  std::size_t length = 0;
  while (true) {
    if (header_end == std::string::npos) {
      header_end = buf.find("\r\n\r\n");
      if (header_end != std::string::npos) {
        std::string head = buf.substr(0, header_end);
        std::transform(head.begin(), head.end(), head.begin(), [](unsigned char c) { return std::tolower(c); });
        const auto cl = head.find("content-length:");
        if (cl == std::string::npos) return false;
        length = std::stoul(head.substr(cl + 15));
        if (head.rfind("http/1.1 200", 0) != 0) return false;
      }
    }
    if (header_end != std::string::npos && buf.size() >= header_end + 4 + length) {
      return buf.substr(header_end + 4, length) == expected;
    }
    const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n <= 0) return false;
    buf.append(chunk, static_cast<std::size_t>(n));
  }
}

}  // namespace

ReaperReport reaper_experiment(const HostSpec& spec, const ReaperExperimentOptions& options) {
  ReaperReport report;
  report.reaper = options.reaper;
  report.clients = options.clients;
  report.csv = options.csv.empty()
                   ? spec.work_dir / (options.reaper ? "connections-with.csv" : "connections-without.csv")
                   : options.csv;
  std::error_code ec;
  fs::remove(report.csv, ec);

  std::vector<std::string> args{"--port",          "0",
                                "--bind",          "127.0.0.1",
                                "--announce",      "--functions-dir",
                                spec.functions_dir().string(),
                                "--executor",      "native",
                                "--connection-stats", report.csv.string(),
                                "--connection-stats-interval", std::to_string(options.sample_interval.count())};
  if (options.reaper) {
    args.push_back(fmt::format("--reaper={},60000", options.unread_timeout.count()));
  }
  HostProcess host(spec, args, spec.work_dir / "reaper-host.out");

  const nlohmann::json event{{"n", options.fib_n}};
  const std::string body = event.dump();
  const std::string request = fmt::format(
      "POST /invoke/{} HTTP/1.1\r\nHost: 127.0.0.1:{}\r\nContent-Type: application/json\r\n"
      "Content-Length: {}\r\n\r\n{}",
      options.function, host.port(), body.size(), body);
  const std::string expected = std::to_string(fib_value(options.fib_n));

  std::vector<ClientOutcome> outcomes(static_cast<std::size_t>(options.clients));
  std::vector<std::thread> threads;
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < options.clients; ++i) {
    const auto at = start + options.arrival_span * i / std::max(1, options.clients);
    threads.emplace_back([&, i, at] {
      std::this_thread::sleep_until(at);
      ClientOutcome& out = outcomes[static_cast<std::size_t>(i)];
      out.reader = options.reader_every > 0 && i % options.reader_every == 0;
      const int fd = connect_loopback(host.port());
      if (fd < 0 || ::send(fd, request.data(), request.size(), MSG_NOSIGNAL) != static_cast<ssize_t>(request.size())) {
        out.send_failed = true;
        if (fd >= 0) ::close(fd);
        return;
      }
      if (out.reader) {
        out.ok = read_response(fd, expected);
      } else {
        std::this_thread::sleep_for(options.hold);
      }
      ::close(fd);
    });
  }
  for (auto& t : threads) t.join();
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  // One more sampling period so the tail is on record.
  std::this_thread::sleep_for(options.sample_interval * 2);
  {
    BenchClient client(host.url(), false);
    report.reaped = client.stats().at("reaped").get<std::uint64_t>();
  }
  host.stop();

  for (const auto& o : outcomes) {
    report.readers += o.reader ? 1 : 0;
    report.readers_ok += o.reader && o.ok ? 1 : 0;
    report.send_failures += o.send_failed ? 1 : 0;
  }

  std::ifstream in(report.csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string time, open, unread;
    if (!std::getline(fields, time, ',') || !std::getline(fields, open, ',') || !std::getline(fields, unread)) continue;
    report.samples.emplace_back(std::stoul(open), std::stoul(unread));
    report.peak_open = std::max<std::size_t>(report.peak_open, std::stoul(open));
  }
  if (report.samples.empty()) throw std::runtime_error("no connection samples in " + report.csv.string());
  return report;
}

std::string format_reaper_summary(const std::vector<ReaperReport>& reports) {
  std::string out = fmt::format("{:<8} {:>8} {:>10} {:>8} {:>12} {:>10}\n", "reaper", "clients", "peak open",
                                "reaped", "readers ok", "wall s");
  for (const auto& r : reports) {
    out += fmt::format("{:<8} {:>8} {:>10} {:>8} {:>9}/{:<2} {:>10.2f}\n", r.reaper ? "on" : "off", r.clients,
                       r.peak_open, r.reaped, r.readers_ok, r.readers, r.wall_seconds);
  }
  const ReaperReport* on = nullptr;
  const ReaperReport* off = nullptr;
  for (const auto& r : reports) (r.reaper ? on : off) = &r;
  if (on != nullptr && off != nullptr && off->peak_open > 0) {
    const double saved = 1.0 - static_cast<double>(on->peak_open) / static_cast<double>(off->peak_open);
    out += fmt::format("peak reduction with reaper: {} connections ({:.1f}%)\n",
                       static_cast<long>(off->peak_open) - static_cast<long>(on->peak_open), saved * 100.0);
  }
  return out;
}

}  // namespace snafu
