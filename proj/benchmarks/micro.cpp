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
#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include <benchmark/benchmark.h>
#include <nlohmann/json.hpp>

#include "snafu/auth/accounts.hpp"
#include "snafu/auth/crypto.hpp"
#include "snafu/auth/sigv4.hpp"
#include "snafu/control/control_plane.hpp"
#include "snafu/execution/invoker.hpp"
#include "snafu/observability/invocation_log.hpp"
#include "snafu/registry/registry.hpp"
#include "snafu/triggers/cron.hpp"
#include "snafu/worker/protocol.hpp"

using namespace snafu;

namespace {

const Account kAccount{"AKIDMICRO", "micro-secret-key", "micro"};

http::Request invoke_request(std::size_t body_bytes) {
  http::Request r;
  r.method = "POST";
  r.target = "/2015-03-31/functions/fib/invocations";
  r.headers.set("Host", "127.0.0.1:10000");
  r.headers.set("Content-Type", "application/json");
  r.body = std::string(body_bytes, 'x');
  return r;
}

sigv4::SigningParams params() {
  sigv4::SigningParams p;
  p.access_key_id = kAccount.access_key_id;
  p.secret_access_key = kAccount.secret_access_key;
  return p;
}

void BM_Sha256(benchmark::State& state) {
  const std::string data(static_cast<std::size_t>(state.range(0)), 'a');
  for (auto _ : state) benchmark::DoNotOptimize(crypto::sha256_hex(data));
  state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Sha256)->Arg(16)->Arg(1024);

void BM_SigV4Sign(benchmark::State& state) {
  const auto base = invoke_request(static_cast<std::size_t>(state.range(0)));
  const auto p = params();
  for (auto _ : state) {
    auto r = base;
    sigv4::sign_request(r, p);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_SigV4Sign)->Arg(8)->Arg(4096);

void BM_SigV4Verify(benchmark::State& state) {
  auto r = invoke_request(static_cast<std::size_t>(state.range(0)));
  const auto p = params();
  sigv4::sign_request(r, p);
  const AccountList accounts({kAccount});
  for (auto _ : state) {
    auto v = sigv4::verify_request(r, accounts, p.time);
    if (!v.ok()) state.SkipWithError("verification failed");
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_SigV4Verify)->Arg(8)->Arg(4096);

void BM_CronNext(benchmark::State& state) {
  const auto schedule = parse_cron(state.range(0) == 0 ? "*/5 * * * *" : "0 0 29 2 *");
  const auto start = std::chrono::system_clock::now();
  for (auto _ : state) benchmark::DoNotOptimize(cron_next(schedule, start));
}
BENCHMARK(BM_CronNext)->Arg(0)->Arg(1);

void BM_CronParse(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(parse_cron("0,15,30,45 9-17/2 1,15 * 1-5"));
}
BENCHMARK(BM_CronParse);

void BM_ProtocolEncodeRequest(benchmark::State& state) {
  worker::WorkerRequest r;
  r.id = "42";
  r.handler = "fib.fib";
  r.event = {{"n", 15}, {"text", std::string(static_cast<std::size_t>(state.range(0)), 'z')}};
  r.context.request_id = "req-42";
  r.context.function_name = "fib";
  for (auto _ : state) benchmark::DoNotOptimize(worker::encode_request(r));
}
BENCHMARK(BM_ProtocolEncodeRequest)->Arg(8)->Arg(4096);

void BM_ProtocolDecodeResponse(benchmark::State& state) {
  worker::WorkerResponse r;
  r.id = "42";
  r.result = std::string(static_cast<std::size_t>(state.range(0)), 'z');
  const auto line = worker::encode_response(r);
  for (auto _ : state) benchmark::DoNotOptimize(worker::decode_response_line(line));
}
BENCHMARK(BM_ProtocolDecodeResponse)->Arg(8)->Arg(4096);

void BM_CsvRow(benchmark::State& state) {
  InvocationRecord r;
  r.timestamp = std::chrono::system_clock::now();
  r.request_id = "0b6f1c2e-8a4d-4f7e-9a51-3c2d1e0f9a8b";
  r.tenant = "default";
  r.function = "fib";
  r.executor = "IP+O+L";
  r.duration_ms = 0.123;
  for (auto _ : state) benchmark::DoNotOptimize(csv_row(r));
}
BENCHMARK(BM_CsvRow);

// fib(n) through the in-process executor with local nested calls.
void BM_NativeFib(benchmark::State& state) {
  Registry registry;
  FunctionUnit unit;
  unit.name = "fib";
  unit.handler = "fib.fib";
  unit.source = "fib.native";
  registry.register_unit(unit);
  InvokerOptions options;
  options.executor.isolation = state.range(1) != 0;
  Invoker invoker(registry, std::move(options));
  const auto u = registry.lookup(kDefaultTenant, "fib");
  const nlohmann::json event{{"n", state.range(0)}};
  for (auto _ : state) {
    auto r = invoker.invoke(*u, event, invoker.make_context(*u));
    if (!r.ok()) state.SkipWithError(r.error_message.c_str());
  }
  state.counters["calls/s"] = benchmark::Counter(
      static_cast<double>(invoker.executed_count()), benchmark::Counter::kIsRate);
  invoker.shutdown();
}
BENCHMARK(BM_NativeFib)->Args({15, 0})->Args({15, 1})->Unit(benchmark::kMillisecond);

// One helloworld invoke over loopback HTTP against an in-process control
// plane: 0 plain, 1 debug output, 2 AWS4, 3 AWS4 plus debug output.
void BM_HttpInvoke(benchmark::State& state) {
  const auto dir = std::filesystem::temp_directory_path() / "snafu-microbench";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "accounts.json")
        << nlohmann::json::array({{{"access_key_id", kAccount.access_key_id},
                                   {"secret_access_key", kAccount.secret_access_key},
                                   {"tenant", kAccount.tenant}}})
               .dump();
  }
  const int mode = static_cast<int>(state.range(0));
  InstanceConfig config;
  config.port = 0;
  config.bind_address = "127.0.0.1";
  config.functions_dir = std::filesystem::path(SNAFU_BENCH_SAMPLES) / "functions";
  config.accounts_file = dir / "accounts.json";
  config.executor.debug_output = mode == 1 || mode == 3;
  config.executor.authentication = mode >= 2;
  config.auth_mode = mode >= 2 ? AuthMode::aws4 : AuthMode::none;
  ControlPlane cp(config);
  cp.start();

  http::Client client(*http::Endpoint::parse(cp.url()));
  auto base = invoke_request(2);
  base.target = "/2015-03-31/functions/helloworld/invocations";
  base.body = "{}";
  base.headers.set("Host", "127.0.0.1:" + std::to_string(cp.port()));
  for (auto _ : state) {
    auto r = base;
    if (mode >= 2) sigv4::sign_request(r, params());
    const auto res = client.send(r);
    if (!res.response || res.response->status != 200) state.SkipWithError("invoke failed");
  }
  cp.stop();
}
BENCHMARK(BM_HttpInvoke)->DenseRange(0, 3)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
