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
#include <signal.h>

#include <chrono>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "snafu/auth/sigv4.hpp"
#include "snafu/common/error.hpp"
#include "snafu/control/control_plane.hpp"
#include "snafu/control/instance_config.hpp"
#include "support.hpp"

using namespace snafu;
namespace tk = snafu::testkit;
namespace fs = std::filesystem;
using namespace std::chrono_literals;

namespace {

const Account kAlice{"AKIDALICE", "alice-secret", "alice"};
const Account kBob{"AKIDBOB", "bob-secret", "bob"};

// Functions directory seeded from the samples, plus an accounts file.
struct Workspace {
  Workspace() {
    fs::copy(tk::samples_dir() / "functions", functions(), fs::copy_options::recursive);
    nlohmann::json accounts = nlohmann::json::array();
    for (const auto& a : {kAlice, kBob}) {
      accounts.push_back({{"access_key_id", a.access_key_id}, {"secret_access_key", a.secret_access_key},
                          {"tenant", a.tenant}});
    }
    tk::write_text(dir / "accounts.json", accounts.dump());
  }
  fs::path functions() const { return dir / "functions"; }

  InstanceConfig config(ExecutorConfig executor = {}) const {
    InstanceConfig c;
    c.port = 0;
    c.bind_address = "127.0.0.1";
    c.executor = executor;
    c.functions_dir = functions();
    c.functions_dir_explicit = true;
    c.accounts_file = dir / "accounts.json";
    c.log_file = dir / "log.csv";
    c.worker_executable = tk::worker_executable();
    return c;
  }

  tk::TempDir dir;
};

struct Plane {
  explicit Plane(InstanceConfig config) : cp(std::move(config), tk::control_executable()) { cp.start(); }
  ~Plane() { cp.stop(); }
  ControlPlane cp;
};

http::Response send(const std::string& url, const std::string& method, const std::string& target,
                    const std::string& body = {}, std::vector<http::Header> headers = {}) {
  http::Client client(*http::Endpoint::parse(url), 60s);
  http::Request r;
  r.method = method;
  r.target = target;
  r.body = body;
  for (auto& h : headers) r.headers.add(h.name, h.value);
  auto res = client.send(r);
  if (!res.response) {
    http::Response failed;
    failed.status = 0;
    failed.body = res.error;
    return failed;
  }
  return *res.response;
}

http::Response invoke(const std::string& url, const std::string& name, const nlohmann::json& event,
                      std::vector<http::Header> headers = {}) {
  return send(url, "POST", "/2015-03-31/functions/" + name + "/invocations", event.dump(), std::move(headers));
}

http::Response signed_invoke(const std::string& url, const std::string& name, const nlohmann::json& event,
                             const Account& account) {
  const auto ep = *http::Endpoint::parse(url);
  http::Request r;
  r.method = "POST";
  r.target = "/2015-03-31/functions/" + name + "/invocations";
  r.body = event.dump();
  r.headers.add("Host", ep.host + ":" + std::to_string(ep.port));
  sigv4::SigningParams p;
  p.access_key_id = account.access_key_id;
  p.secret_access_key = account.secret_access_key;
  sigv4::sign_request(r, p);
  http::Client client(ep, 60s);
  auto res = client.send(r);
  return res.response ? *res.response : http::Response{0, {}, res.error};
}

nlohmann::json body_json(const http::Response& r) { return nlohmann::json::parse(r.body, nullptr, false); }

}  // namespace

TEST(InstanceArgs, FlagsAndDefaults) {
  const auto a = parse_instance_args({"--port", "0", "--executor", "native-isolated", "--authenticator", "aws4",
                                      "--logger", "csv", "--log-file", "x.csv", "-d", "--callback", "self",
                                      "--reaper=500,2000"});
  EXPECT_EQ(a.config.port, 0);
  EXPECT_TRUE(a.config.executor.isolation);
  EXPECT_TRUE(a.config.executor.logging);
  EXPECT_TRUE(a.config.executor.debug_output);
  EXPECT_TRUE(a.config.executor.authentication);
  EXPECT_EQ(a.config.auth_mode, AuthMode::aws4);
  EXPECT_EQ(a.config.log_file, "x.csv");
  EXPECT_EQ(a.config.callback_endpoint, "self");
  EXPECT_TRUE(a.config.reaper.enabled);
  EXPECT_EQ(a.config.reaper.response_unread_timeout, 500ms);
  EXPECT_EQ(a.config.reaper.idle_timeout, 2000ms);
  EXPECT_EQ(a.config.executor.label(), "IIP+AWS4+O+L");

  const auto d = parse_instance_args({});
  EXPECT_EQ(d.config.port, kDefaultPort);
  EXPECT_FALSE(d.config.reaper.enabled);
  EXPECT_EQ(d.config.auth_mode, AuthMode::none);
}

TEST(InstanceArgs, Errors) {
  EXPECT_THROW(parse_instance_args({"--executor", "java"}), ConfigError);
  EXPECT_THROW(parse_instance_args({"--authenticator", "kerberos"}), ConfigError);
  EXPECT_THROW(parse_instance_args({"--port", "70000"}), ConfigError);
  EXPECT_THROW(parse_instance_args({"--forward", "nowhere"}), ConfigError);
  EXPECT_THROW(parse_instance_args({"--forward", "http://a:1", "--per-tenant-spawn"}), ConfigError);
  EXPECT_THROW(parse_instance_args({"--callback", "ftp://x"}), ConfigError);
  EXPECT_THROW(parse_instance_args({"--reaper=10"}), ConfigError);
  EXPECT_THROW(parse_instance_args({"--bogus"}), ConfigError);
  EXPECT_TRUE(parse_instance_args({"--help"}).help);
}

TEST(InstanceArgs, TenantChildArgs) {
  InstanceConfig c;
  c.executor = *parse_executor_flag("external-shared");
  c.executor.logging = true;
  c.log_file = "/tmp/logs/snafu.csv";
  c.functions_dir = "/srv/functions";
  c.worker_executable = "/bin/worker";
  const auto args = tenant_child_args(c, "alice");
  const auto child = parse_instance_args(args).config;
  EXPECT_EQ(child.port, 0);
  EXPECT_EQ(child.tenant, "alice");
  EXPECT_EQ(child.auth_mode, AuthMode::none);
  EXPECT_EQ(child.executor.kind, RuntimeKind::external_shared);
  EXPECT_EQ(child.log_file, "/tmp/logs/snafu-alice.csv");
  EXPECT_EQ(child.functions_dir, "/srv/functions");
  EXPECT_EQ(child.worker_executable, "/bin/worker");
  EXPECT_TRUE(child.announce);
}

TEST(ControlPlane, InvokeRoutes) {
  Workspace ws;
  Plane p(ws.config());
  const auto url = p.cp.url();

  auto r = invoke(url, "helloworld", nlohmann::json::object());
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(body_json(r), "Hello, World!");
  EXPECT_TRUE(r.headers.contains(kRequestIdHeader));

  r = send(url, "POST", "/invoke/fib", "{\"n\":10}");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(body_json(r), 55);

  r = send(url, "POST", "/invoke/helloworld");
  EXPECT_EQ(body_json(r), "Hello, World!");

  EXPECT_EQ(invoke(url, "nosuch", {}).status, 404);
  EXPECT_EQ(send(url, "POST", "/invoke/fib", "{not json").status, 400);
  EXPECT_EQ(send(url, "GET", "/2015-03-31/functions/fib/invocations").status, 405);
  EXPECT_EQ(send(url, "GET", "/elsewhere").status, 404);
}

TEST(ControlPlane, FunctionErrorsCarryHeader) {
  Workspace ws;
  Plane p(ws.config());
  const auto r = invoke(p.cp.url(), "fail", {{"message", "nope"}});
  // "fail" lives in the echo unit's module but is not a unit itself.
  EXPECT_EQ(r.status, 404);

  const auto e = invoke(p.cp.url(), "fib", {{"n", "x"}});
  EXPECT_EQ(e.status, 200);
  EXPECT_EQ(e.headers.get(kFunctionErrorHeader), "Unhandled");
  EXPECT_TRUE(body_json(e).contains("errorMessage"));
}

TEST(ControlPlane, InvocationTypes) {
  Workspace ws;
  Plane p(ws.config());
  const auto url = p.cp.url();
  EXPECT_EQ(invoke(url, "helloworld", {}, {{"X-Amz-Invocation-Type", "Event"}}).status, 400);
  EXPECT_EQ(invoke(url, "helloworld", {}, {{"X-Amz-Invocation-Type", "Bogus"}}).status, 400);
  EXPECT_EQ(invoke(url, "helloworld", {}, {{"X-Amz-Invocation-Type", "DryRun"}}).status, 204);
  EXPECT_EQ(invoke(url, "helloworld", {}, {{"X-Amz-Invocation-Type", "RequestResponse"}}).status, 200);
  EXPECT_EQ(p.cp.invoker().executed_count(), 1u);
}

TEST(ControlPlane, FibThroughHttpCountsEveryCall) {
  Workspace ws;
  ExecutorConfig e;
  e.logging = true;
  auto config = ws.config(e);
  config.callback_endpoint = std::string(kSelfEndpoint);
  Plane p(config);
  const auto r = invoke(p.cp.url(), "fib", {{"n", 12}});
  EXPECT_EQ(body_json(r), 144);
  const auto stats = body_json(send(p.cp.url(), "GET", "/snafu/stats"));
  EXPECT_EQ(stats["executed"], tk::fib_oracle(12).calls);
  p.cp.log()->flush();
  EXPECT_EQ(tk::csv_rows(ws.dir / "log.csv"), static_cast<std::size_t>(tk::fib_oracle(12).calls));
}

TEST(ControlPlane, RecursionDepthHeader) {
  Workspace ws;
  Plane p(ws.config());
  EXPECT_EQ(invoke(p.cp.url(), "helloworld", {}, {{"X-Snafu-Depth", "bogus"}}).status, 400);
  const auto deep = invoke(p.cp.url(), "helloworld", {}, {{"X-Snafu-Depth", std::to_string(kDefaultRecursionLimit + 1)}});
  EXPECT_EQ(deep.headers.get(kFunctionErrorHeader), "Unhandled");
  EXPECT_NE(body_json(deep)["errorMessage"].get<std::string>().find("recursion depth"), std::string::npos);
}

TEST(ControlPlane, ManageFunctions) {
  Workspace ws;
  const std::string create_body =
      nlohmann::json{{"FunctionName", "greet"}, {"Handler", "hello.helloworld"}, {"Runtime", "native"}, {"Code", "x"}}
          .dump();
  {
    Plane p(ws.config());
    const auto url = p.cp.url();
    auto list = body_json(send(url, "GET", "/2015-03-31/functions/"));
    std::vector<std::string> names;
    for (const auto& f : list["Functions"]) names.push_back(f["FunctionName"]);
    EXPECT_EQ(names, (std::vector<std::string>{"counter", "echo", "fib", "fib_delay", "helloworld"}));

    const auto got = body_json(send(url, "GET", "/2015-03-31/functions/fib"));
    EXPECT_EQ(got["Configuration"]["Handler"], "fib.fib");
    EXPECT_EQ(send(url, "GET", "/2015-03-31/functions/nosuch").status, 404);

    auto created = send(url, "POST", "/2015-03-31/functions", create_body);
    EXPECT_EQ(created.status, 201) << created.body;
    EXPECT_EQ(body_json(invoke(url, "greet", {})), "Hello, World!");
    EXPECT_EQ(send(url, "POST", "/2015-03-31/functions", create_body).status, 409);
    EXPECT_TRUE(fs::exists(ws.functions() / kCreatedDir / "default" / "greet" / "config.json"));

    auto bad = nlohmann::json::parse(create_body);
    bad["FunctionName"] = "other";
    bad["Handler"] = "nodot";
    EXPECT_EQ(send(url, "POST", "/2015-03-31/functions", bad.dump()).status, 400);
    bad["Handler"] = "hello.helloworld";
    bad.erase("Code");
    EXPECT_EQ(send(url, "POST", "/2015-03-31/functions", bad.dump()).status, 400);
    bad["Code"] = {{"ZipFile", "!!!"}};
    EXPECT_EQ(send(url, "POST", "/2015-03-31/functions", bad.dump()).status, 400);
    EXPECT_EQ(send(url, "POST", "/2015-03-31/functions", "[]").status, 400);
  }
  {
    // Created functions survive a restart and can be deleted.
    Plane p(ws.config());
    const auto url = p.cp.url();
    EXPECT_EQ(body_json(invoke(url, "greet", {})), "Hello, World!");
    EXPECT_EQ(send(url, "DELETE", "/2015-03-31/functions/greet").status, 204);
    EXPECT_EQ(invoke(url, "greet", {}).status, 404);
    EXPECT_EQ(send(url, "DELETE", "/2015-03-31/functions/greet").status, 404);
    EXPECT_FALSE(fs::exists(ws.functions() / kCreatedDir / "default" / "greet"));
  }
}

TEST(ControlPlane, Aws4Authentication) {
  Workspace ws;
  auto config = ws.config();
  config.auth_mode = AuthMode::aws4;
  config.executor.authentication = true;
  Plane p(config);
  const auto url = p.cp.url();
  EXPECT_EQ(invoke(url, "helloworld", {}).status, 403);
  EXPECT_EQ(signed_invoke(url, "helloworld", {}, kAlice).status, 200);
  EXPECT_EQ(signed_invoke(url, "helloworld", {}, Account{"AKIDALICE", "wrong", "alice"}).status, 403);
  EXPECT_EQ(signed_invoke(url, "helloworld", {}, Account{"AKIDNOBODY", "x", "x"}).status, 403);
}

TEST(ControlPlane, NestedCallsAreSignedUnderAws4) {
  Workspace ws;
  auto config = ws.config();
  config.auth_mode = AuthMode::aws4;
  config.executor.authentication = true;
  config.callback_endpoint = std::string(kSelfEndpoint);
  Plane p(config);
  const auto r = signed_invoke(p.cp.url(), "fib", {{"n", 8}}, kAlice);
  EXPECT_EQ(body_json(r), 21) << r.body;
  EXPECT_EQ(p.cp.invoker().executed_count(), static_cast<std::uint64_t>(tk::fib_oracle(8).calls));
}

TEST(ControlPlane, TenantsSeeOwnAndDefaultFunctions) {
  Workspace ws;
  auto config = ws.config();
  config.auth_mode = AuthMode::accounts;
  Plane p(config);
  const auto url = p.cp.url();
  const std::string body =
      nlohmann::json{{"FunctionName", "mine"}, {"Handler", "counter.counter"}, {"Code", "x"}}.dump();
  EXPECT_EQ(send(url, "POST", "/2015-03-31/functions", body, {{"X-Auth-Key", "alice-secret"}}).status, 201);
  EXPECT_EQ(invoke(url, "mine", {}, {{"X-Auth-Key", "alice-secret"}}).status, 200);
  EXPECT_EQ(invoke(url, "mine", {}, {{"X-Auth-Key", "bob-secret"}}).status, 404);
  EXPECT_EQ(invoke(url, "helloworld", {}, {{"X-Auth-Key", "bob-secret"}}).status, 200);
  EXPECT_EQ(invoke(url, "helloworld", {}, {{"X-Auth-Key", "nobody"}}).status, 403);
}

TEST(ControlPlane, ForwardingTopologies) {
  Workspace ws;
  Plane slave(ws.config());

  // Master relays, nested calls stay on the slave.
  {
    auto config = ws.config();
    config.forward_target = slave.cp.url();
    Plane master(config);
    EXPECT_EQ(body_json(invoke(master.cp.url(), "fib", {{"n", 12}})), 144);
    EXPECT_EQ(master.cp.forwarded_count(), 1u);
    EXPECT_EQ(master.cp.invoker().executed_count(), 0u);
    EXPECT_EQ(slave.cp.invoker().executed_count(), static_cast<std::uint64_t>(tk::fib_oracle(12).calls));
  }
  // Nested calls come back through the master.
  {
    const auto before = slave.cp.invoker().executed_count();
    auto config = ws.config();
    config.forward_target = slave.cp.url();
    config.callback_endpoint = std::string(kSelfEndpoint);
    Plane master(config);
    EXPECT_EQ(body_json(invoke(master.cp.url(), "fib", {{"n", 12}})), 144);
    EXPECT_EQ(master.cp.forwarded_count(), static_cast<std::uint64_t>(tk::fib_oracle(12).calls));
    EXPECT_EQ(slave.cp.invoker().executed_count() - before, static_cast<std::uint64_t>(tk::fib_oracle(12).calls));
  }
}

TEST(ControlPlane, UnreachableForwardTargetIs502) {
  Workspace ws;
  int dead_port;
  {
    Plane gone(ws.config());
    dead_port = gone.cp.port();
  }
  auto config = ws.config();
  config.forward_target = "http://127.0.0.1:" + std::to_string(dead_port);
  Plane master(config);
  EXPECT_EQ(invoke(master.cp.url(), "helloworld", {}).status, 502);
  EXPECT_EQ(send(master.cp.url(), "GET", "/2015-03-31/functions/").status, 502);
}

TEST(ControlPlane, PerTenantChildren) {
  Workspace ws;
  auto config = ws.config();
  config.auth_mode = AuthMode::accounts;
  config.per_tenant_spawn = true;
  Plane p(config);
  const auto url = p.cp.url();
  auto* spawner = p.cp.spawner();
  ASSERT_NE(spawner, nullptr);

  EXPECT_EQ(body_json(invoke(url, "counter", {}, {{"X-Auth-Key", "alice-secret"}})), 1);
  EXPECT_EQ(body_json(invoke(url, "counter", {}, {{"X-Auth-Key", "alice-secret"}})), 2);
  EXPECT_EQ(body_json(invoke(url, "counter", {}, {{"X-Auth-Key", "bob-secret"}})), 1);
  EXPECT_EQ(spawner->child_count(), 2u);
  ASSERT_TRUE(spawner->port_of("alice") && spawner->port_of("bob"));
  EXPECT_NE(*spawner->port_of("alice"), *spawner->port_of("bob"));
  EXPECT_NE(*spawner->port_of("alice"), p.cp.port());

  const pid_t alice = *spawner->pid_of("alice");
  ::kill(alice, SIGKILL);
  ASSERT_TRUE(tk::eventually(
      [&] {
        const auto r = invoke(url, "counter", {}, {{"X-Auth-Key", "alice-secret"}});
        return r.status == 200 && body_json(r) == 1;
      },
      10s, 100ms));
  EXPECT_NE(*spawner->pid_of("alice"), alice);
  EXPECT_EQ(spawner->respawn_count(), 1u);
  EXPECT_EQ(p.cp.invoker().executed_count(), 0u);
}

TEST(ControlPlane, HotDeployedFunctionIsInvokable) {
  Workspace ws;
  Plane p(ws.config());
  const auto url = p.cp.url();
  EXPECT_EQ(invoke(url, "late", {}).status, 404);
  const auto t0 = std::chrono::steady_clock::now();
  tk::write_text(ws.functions() / "late" / "hello.native", "module hello\n");
  tk::write_text(ws.functions() / "late" / "config.json",
                 R"({"FunctionName": "late", "Handler": "hello.helloworld", "Runtime": "native"})");
  ASSERT_TRUE(tk::eventually([&] { return invoke(url, "late", {}).status == 200; }, 2s, 50ms));
  EXPECT_LT(std::chrono::steady_clock::now() - t0, 2s);
}

TEST(ControlPlane, TriggerDispatchRunsAsDefaultTenant) {
  Workspace ws;
  auto config = ws.config();
  config.auth_mode = AuthMode::aws4;
  Plane p(config);
  const auto r = p.cp.dispatch("fib", {{"n", 6}});
  ASSERT_TRUE(r.ok()) << r.error_message;
  EXPECT_EQ(r.value, 8);
  EXPECT_FALSE(p.cp.dispatch("nosuch", {}).ok());
}

TEST(ControlPlane, MissingExplicitFunctionsDirFails) {
  Workspace ws;
  auto config = ws.config();
  config.functions_dir = ws.dir / "absent";
  ControlPlane cp(config, tk::control_executable());
  EXPECT_THROW(cp.start(), ConfigError);
}
