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

#include "snafu/worker/worker.hpp"

#include <algorithm>
#include <csignal>
#include <system_error>

#include <spdlog/spdlog.h>

#include "snafu/common/error.hpp"

namespace snafu::worker {

namespace {

constexpr auto kBackoffBase = std::chrono::milliseconds(100);
constexpr auto kBackoffCap = std::chrono::milliseconds(5000);

WorkerResponse terminated_response(const std::string& id) {
  WorkerResponse r;
  r.id = id;
  r.ok = false;
  r.message = std::string(kWorkerTerminated);
  r.type = "WorkerTerminated";
  return r;
}

double millis(std::chrono::milliseconds d) { return static_cast<double>(d.count()); }

}  // namespace

std::chrono::milliseconds restart_backoff(int failures) {
  if (failures <= 0) return std::chrono::milliseconds(0);
  auto delay = kBackoffBase;
  for (int i = 1; i < failures && delay < kBackoffCap; ++i) delay *= 2;
  return std::min(delay, kBackoffCap);
}

WorkerProcess::WorkerProcess(const WorkerOptions& options)
    : on_callback_(options.on_callback), on_stderr_(options.on_stderr) {}

std::shared_ptr<WorkerProcess> WorkerProcess::start(const WorkerOptions& options) {
  std::shared_ptr<WorkerProcess> p(new WorkerProcess(options));
  Subprocess::Options spawn_options;
  spawn_options.pipe_stdin = true;
  spawn_options.pipe_stdout = true;
  spawn_options.pipe_stderr = true;
  spawn_options.extra_env = options.env;
  p->proc_ = Subprocess::spawn({options.executable, options.source.string()}, spawn_options);
  p->pid_ = p->proc_.pid();
  p->stdout_thread_ = std::thread([raw = p.get()] { raw->read_stdout(); });
  p->stderr_thread_ = std::thread([raw = p.get()] { raw->read_stderr(); });
  return p;
}

WorkerProcess::~WorkerProcess() { stop(std::chrono::milliseconds(0)); }

bool WorkerProcess::send(const std::string& line) {
  std::lock_guard lock(write_mutex_);
  int fd;
  {
    std::lock_guard proc_lock(proc_mutex_);
    fd = proc_.stdin_fd();
  }
  return fd >= 0 && write_all(fd, line);
}

bool WorkerProcess::alive() const {
  std::lock_guard lock(mutex_);
  return !dead_;
}

void WorkerProcess::close_input() {
  std::lock_guard lock(write_mutex_);
  std::lock_guard proc_lock(proc_mutex_);
  proc_.close_stdin();
}

void WorkerProcess::kill() {
  std::lock_guard lock(proc_mutex_);
  proc_.kill(SIGKILL);
}

void WorkerProcess::stop(std::chrono::milliseconds grace) {
  {
    std::lock_guard lock(mutex_);
    if (stopped_) return;
    stopped_ = true;
  }
  close_input();
  const auto deadline = std::chrono::steady_clock::now() + grace;
  while (true) {
    {
      std::lock_guard lock(proc_mutex_);
      if (proc_.try_wait()) break;
      if (std::chrono::steady_clock::now() >= deadline) {
        proc_.kill(SIGKILL);
        proc_.wait();
        break;
      }
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  if (stdout_thread_.joinable()) stdout_thread_.join();
  if (stderr_thread_.joinable()) stderr_thread_.join();
  std::unique_lock lock(mutex_);
  changed_.wait(lock, [this] { return active_callbacks_ == 0; });
}

void WorkerProcess::read_stdout() {
  LineReader reader(proc_.stdout_fd());
  while (auto line = reader.next()) {
    if (line->empty()) continue;
    nlohmann::json frame;
    try {
      frame = parse_frame(*line);
    } catch (const ProtocolError& e) {
      spdlog::warn("worker {}: {}", pid_, e.what());
      continue;
    }
    try {
      switch (classify(frame)) {
        case FrameKind::response: {
          auto response = decode_response(frame);
          std::lock_guard lock(mutex_);
          const auto it = pending_.find(response.id);
          if (it != pending_.end()) {
            it->second.response = std::move(response);
            changed_.notify_all();
          }
          break;
        }
        case FrameKind::callback:
          serve_callback(decode_callback(frame));
          break;
        case FrameKind::enumeration: {
          auto e = decode_enumeration(frame);
          std::lock_guard lock(mutex_);
          enumeration_ = std::move(e);
          changed_.notify_all();
          break;
        }
        default:
          spdlog::warn("worker {}: unexpected frame {}", pid_, *line);
      }
    } catch (const ProtocolError& e) {
      spdlog::warn("worker {}: {}", pid_, e.what());
    }
  }
  std::lock_guard lock(mutex_);
  dead_ = true;
  changed_.notify_all();
}

void WorkerProcess::read_stderr() {
  LineReader reader(proc_.stderr_fd());
  while (auto line = reader.next()) {
    if (on_stderr_) on_stderr_(*line);
  }
}

void WorkerProcess::serve_callback(CallbackRequest callback) {
  auto self = weak_from_this().lock();
  if (!self) return;
  InvocationContext parent;
  {
    std::lock_guard lock(mutex_);
    const auto it = pending_.find(callback.id);
    if (it == pending_.end()) {
      CallbackReply reply;
      reply.call = callback.call;
      reply.ok = false;
      reply.message = "nested call from unknown request " + callback.id;
      send(encode_reply(reply));
      return;
    }
    parent = it->second.context;
    ++active_callbacks_;
  }
  std::thread([self = std::move(self), callback = std::move(callback), parent]() mutable {
    CallbackReply reply;
    reply.call = callback.call;
    InvocationResult result = self->on_callback_
                                  ? self->on_callback_(parent, callback.target, callback.event)
                                  : InvocationResult::failure("nested calls are not supported");
    reply.ok = result.ok();
    if (reply.ok) {
      reply.result = std::move(result.value);
    } else {
      reply.message = result.error_message;
      reply.type = result.error_type;
    }
    try {
      self->send(encode_reply(reply));
    } catch (const ProtocolError& e) {
      CallbackReply failed;
      failed.call = callback.call;
      failed.ok = false;
      failed.message = e.what();
      self->send(encode_reply(failed));
    }
    {
      std::lock_guard lock(self->mutex_);
      --self->active_callbacks_;
      self->changed_.notify_all();
    }
  }).detach();
}

WorkerProcess::Reply WorkerProcess::roundtrip(WorkerRequest request, std::chrono::milliseconds timeout) {
  request.id = "r" + std::to_string(next_id_++);
  const std::string line = encode_request(request);
  const std::string id = request.id;
  {
    std::lock_guard lock(mutex_);
    if (dead_) return {Outcome::terminated, terminated_response(id)};
    pending_[id] = Pending{std::move(request.context), std::nullopt};
  }
  if (!send(line)) {
    std::lock_guard lock(mutex_);
    pending_.erase(id);
    return {Outcome::terminated, terminated_response(id)};
  }

  std::unique_lock lock(mutex_);
  changed_.wait_for(lock, timeout, [&] { return pending_[id].response.has_value() || dead_; });
  auto node = pending_.extract(id);
  if (node.mapped().response) return {Outcome::response, std::move(*node.mapped().response)};
  if (dead_) return {Outcome::terminated, terminated_response(id)};
  return {Outcome::timeout, {}};
}

std::optional<Enumeration> WorkerProcess::enumerate(std::chrono::milliseconds timeout) {
  {
    std::lock_guard lock(mutex_);
    enumeration_.reset();
  }
  if (!send(encode_enumerate_request())) return std::nullopt;
  std::unique_lock lock(mutex_);
  changed_.wait_for(lock, timeout, [&] { return enumeration_.has_value() || dead_; });
  return std::exchange(enumeration_, std::nullopt);
}

SharedWorker::SharedWorker(WorkerOptions options) : options_(std::move(options)) {}

SharedWorker::~SharedWorker() { shutdown(); }

std::size_t SharedWorker::spawn_count() const {
  std::lock_guard lock(mutex_);
  return spawns_;
}

pid_t SharedWorker::pid() const {
  std::lock_guard lock(mutex_);
  return process_ ? process_->pid() : -1;
}

void SharedWorker::shutdown() {
  std::shared_ptr<WorkerProcess> p;
  {
    std::lock_guard lock(mutex_);
    p = std::move(process_);
  }
  if (p) p->stop();
}

std::shared_ptr<WorkerProcess> SharedWorker::running(std::string* error) {
  std::shared_ptr<WorkerProcess> retired;
  std::shared_ptr<WorkerProcess> result;
  {
    std::unique_lock lock(mutex_);
    if (process_ && process_->alive()) return process_;
    if (process_) {
      retired = std::move(process_);
      ++consecutive_failures_;
      not_before_ = std::chrono::steady_clock::now() + restart_backoff(consecutive_failures_);
      spdlog::warn("worker for {} exited; restarting", options_.source.string());
    }
    const auto now = std::chrono::steady_clock::now();
    if (now < not_before_) std::this_thread::sleep_for(not_before_ - now);
    try {
      process_ = WorkerProcess::start(options_);
      ++spawns_;
      result = process_;
    } catch (const std::system_error& e) {
      *error = e.what();
      ++consecutive_failures_;
      not_before_ = std::chrono::steady_clock::now() + restart_backoff(consecutive_failures_);
    }
  }
  if (retired) retired->stop(std::chrono::milliseconds(0));
  return result;
}

void SharedWorker::note_failure(const std::shared_ptr<WorkerProcess>& process) {
  std::shared_ptr<WorkerProcess> retired;
  {
    std::lock_guard lock(mutex_);
    if (process_ != process) return;
    retired = std::move(process_);
    ++consecutive_failures_;
    not_before_ = std::chrono::steady_clock::now() + restart_backoff(consecutive_failures_);
  }
  retired->stop(std::chrono::milliseconds(0));
}

InvocationResult SharedWorker::call(const std::string& handler, const nlohmann::json& event,
                                    const InvocationContext& context,
                                    std::chrono::milliseconds timeout) {
  std::string error;
  auto p = running(&error);
  if (!p) return InvocationResult::failure("executor unavailable: " + error, 0.0, "ExecutorUnavailable");

  WorkerProcess::Reply reply;
  try {
    reply = p->roundtrip({{}, handler, event, context}, timeout);
  } catch (const ProtocolError& e) {
    return InvocationResult::failure(e.what(), 0.0, "ProtocolError");
  }
  switch (reply.outcome) {
    case WorkerProcess::Outcome::response: {
      std::lock_guard lock(mutex_);
      consecutive_failures_ = 0;
      return to_result(reply.response);
    }
    case WorkerProcess::Outcome::timeout:
      p->kill();
      note_failure(p);
      return InvocationResult::timed_out(timeout.count(), millis(timeout));
    case WorkerProcess::Outcome::terminated:
      note_failure(p);
      return to_result(reply.response);
  }
  return InvocationResult::failure(std::string(kWorkerTerminated));
}

InvocationResult run_nonshared(const WorkerOptions& options, const std::string& handler,
                               const nlohmann::json& event, const InvocationContext& context,
                               std::chrono::milliseconds timeout) {
  std::shared_ptr<WorkerProcess> p;
  try {
    p = WorkerProcess::start(options);
  } catch (const std::system_error& e) {
    return InvocationResult::failure(std::string("executor unavailable: ") + e.what(), 0.0,
                                     "ExecutorUnavailable");
  }
  WorkerProcess::Reply reply;
  try {
    reply = p->roundtrip({{}, handler, event, context}, timeout);
  } catch (const ProtocolError& e) {
    p->stop();
    return InvocationResult::failure(e.what(), 0.0, "ProtocolError");
  }
  if (reply.outcome == WorkerProcess::Outcome::timeout) {
    p->kill();
    p->stop(std::chrono::milliseconds(0));
    return InvocationResult::timed_out(timeout.count(), millis(timeout));
  }
  p->stop();
  return to_result(reply.response);
}

std::optional<Enumeration> enumerate_source(const WorkerOptions& options,
                                            std::chrono::milliseconds timeout, std::string* error) {
  std::shared_ptr<WorkerProcess> p;
  try {
    p = WorkerProcess::start(options);
  } catch (const std::system_error& e) {
    if (error != nullptr) *error = std::string("executor unavailable: ") + e.what();
    return std::nullopt;
  }
  auto e = p->enumerate(timeout);
  if (!e && error != nullptr) *error = "worker gave no function list";
  p->stop();
  return e;
}

}  // namespace snafu::worker
