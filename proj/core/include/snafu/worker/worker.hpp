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

#include <sys/types.h>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "snafu/common/subprocess.hpp"
#include "snafu/common/time.hpp"
#include "snafu/worker/protocol.hpp"

namespace snafu::worker {

// Runs a nested call issued by function code inside a worker. `parent` is
// the context of the request on whose behalf the call is made.
using CallbackHandler = std::function<InvocationResult(
    const InvocationContext& parent, const std::string& target, const nlohmann::json& event)>;
using LineSink = std::function<void(std::string_view line)>;

inline constexpr std::string_view kWorkerTerminated = "worker terminated";

struct WorkerOptions {
  // Started as `<executable> <source>`.
  std::string executable;
  std::filesystem::path source;
  std::vector<std::string> env;  // "KEY=VALUE"
  CallbackHandler on_callback;
  LineSink on_stderr;
};

// One worker process. Requests are multiplexed over its stdin and matched by
// id as responses arrive on stdout; nested-call frames are served on their
// own threads so a worker can wait on a call that re-enters it.
class WorkerProcess : public std::enable_shared_from_this<WorkerProcess> {
 public:
  // Throws std::system_error when the process cannot be started.
  static std::shared_ptr<WorkerProcess> start(const WorkerOptions& options);
  ~WorkerProcess();
  WorkerProcess(const WorkerProcess&) = delete;
  WorkerProcess& operator=(const WorkerProcess&) = delete;

  enum class Outcome { response, timeout, terminated };
  struct Reply {
    Outcome outcome = Outcome::terminated;
    WorkerResponse response;
  };

  // Fills in request.id.
  Reply roundtrip(WorkerRequest request, std::chrono::milliseconds timeout);
  std::optional<Enumeration> enumerate(std::chrono::milliseconds timeout);

  bool alive() const;
  pid_t pid() const { return pid_; }

  // End of input: a well-behaved worker finishes and exits.
  void close_input();
  // SIGKILL. Pending requests complete as terminated.
  void kill();
  // Closes input, waits up to `grace` for exit, then kills; joins all
  // threads. Idempotent.
  void stop(std::chrono::milliseconds grace = std::chrono::milliseconds(2000));

 private:
  explicit WorkerProcess(const WorkerOptions& options);
  bool send(const std::string& line);
  void read_stdout();
  void read_stderr();
  void serve_callback(CallbackRequest callback);

  CallbackHandler on_callback_;
  LineSink on_stderr_;

  mutable std::mutex proc_mutex_;
  Subprocess proc_;
  pid_t pid_ = -1;
  std::mutex write_mutex_;

  mutable std::mutex mutex_;
  std::condition_variable changed_;
  struct Pending {
    InvocationContext context;
    std::optional<WorkerResponse> response;
  };
  std::map<std::string, Pending> pending_;
  std::optional<Enumeration> enumeration_;
  bool enumerate_waiting_ = false;
  bool dead_ = false;
  int active_callbacks_ = 0;
  bool stopped_ = false;
  std::atomic<std::uint64_t> next_id_{1};

  std::thread stdout_thread_;
  std::thread stderr_thread_;
};

// A persistent worker shared by all invocations of one unit. It is started
// on first use and restarted after a crash or timeout, waiting with
// exponential backoff (capped at 5 s) between consecutive failures.
class SharedWorker {
 public:
  explicit SharedWorker(WorkerOptions options);
  ~SharedWorker();
  SharedWorker(const SharedWorker&) = delete;
  SharedWorker& operator=(const SharedWorker&) = delete;

  InvocationResult call(const std::string& handler, const nlohmann::json& event,
                        const InvocationContext& context, std::chrono::milliseconds timeout);

  std::size_t spawn_count() const;
  // Pid of the running process, -1 when none.
  pid_t pid() const;
  void shutdown();

 private:
  std::shared_ptr<WorkerProcess> running(std::string* error);
  void note_failure(const std::shared_ptr<WorkerProcess>& process);

  WorkerOptions options_;
  mutable std::mutex mutex_;
  std::shared_ptr<WorkerProcess> process_;
  std::size_t spawns_ = 0;
  int consecutive_failures_ = 0;
  SteadyTime not_before_{};
};

// Backoff before restart number `failures` (1-based): 100 ms doubling, 5 s cap.
std::chrono::milliseconds restart_backoff(int failures);

// One fresh process for a single request: spawn, send, read the response,
// end of input. Spawn failure yields "executor unavailable".
InvocationResult run_nonshared(const WorkerOptions& options, const std::string& handler,
                               const nlohmann::json& event, const InvocationContext& context,
                               std::chrono::milliseconds timeout);

// Asks a fresh worker for the functions found in `options.source`.
std::optional<Enumeration> enumerate_source(const WorkerOptions& options,
                                            std::chrono::milliseconds timeout,
                                            std::string* error = nullptr);

}  // namespace snafu::worker
