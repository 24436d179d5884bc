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

// Worker process for the external executors. Speaks the line protocol on
// stdin/stdout and runs native modules resolved from the source argument.
// Requests run on their own threads, so a handler waiting on a nested call
// does not block the request that call re-enters with.

#include <unistd.h>

#include <atomic>
#include <condition_variable>
#include <cstdio>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "snafu/common/error.hpp"
#include "snafu/execution/native.hpp"
#include "snafu/execution/samples.hpp"
#include "snafu/worker/protocol.hpp"

namespace {

using snafu::FunctionError;
using snafu::InvocationResult;
namespace w = snafu::worker;

std::mutex out_mutex;

void emit(const std::string& line) {
  std::lock_guard lock(out_mutex);
  std::fwrite(line.data(), 1, line.size(), stdout);
  std::fflush(stdout);
}

class Calls {
 public:
  std::string open() {
    std::lock_guard lock(mutex_);
    const std::string id = "c" + std::to_string(++next_);
    waiting_[id];
    return id;
  }

  void deliver(w::CallbackReply reply) {
    std::lock_guard lock(mutex_);
    auto it = waiting_.find(reply.call);
    if (it == waiting_.end()) return;
    it->second = std::move(reply);
    changed_.notify_all();
  }

  w::CallbackReply wait(const std::string& id) {
    std::unique_lock lock(mutex_);
    changed_.wait(lock, [&] { return closed_ || waiting_[id].has_value(); });
    auto node = waiting_.extract(id);
    if (!node.mapped()) {
      w::CallbackReply gone;
      gone.call = id;
      gone.ok = false;
      gone.message = "host went away";
      return gone;
    }
    return std::move(*node.mapped());
  }

  void close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    changed_.notify_all();
  }

 private:
  std::mutex mutex_;
  std::condition_variable changed_;
  std::map<std::string, std::optional<w::CallbackReply>> waiting_;
  std::uint64_t next_ = 0;
  bool closed_ = false;
};

class WorkerContext : public snafu::FunctionContext {
 public:
  WorkerContext(snafu::InvocationContext info, snafu::ModuleState* state, std::string request_id, Calls& calls)
      : FunctionContext(std::move(info), state), request_id_(std::move(request_id)), calls_(calls) {}

  nlohmann::json invoke(std::string_view target, const nlohmann::json& event) override {
    w::CallbackRequest cb;
    cb.id = request_id_;
    cb.call = calls_.open();
    cb.target = std::string(target);
    cb.event = event;
    emit(w::encode_callback(cb));
    auto reply = calls_.wait(cb.call);
    if (!reply.ok) throw FunctionError(reply.message, reply.type.empty() ? "FunctionError" : reply.type);
    return reply.result;
  }

 private:
  std::string request_id_;
  Calls& calls_;
};

struct Loaded {
  snafu::ModulePtr module;
  std::unique_ptr<snafu::ModuleState> state;
  std::string error;
};

InvocationResult run(const Loaded& loaded, const w::WorkerRequest& request, Calls& calls) {
  if (!loaded.module) return InvocationResult::failure(loaded.error, 0.0, "ModuleLoadError");
  const auto dot = request.handler.rfind('.');
  const std::string function = dot == std::string::npos ? request.handler : request.handler.substr(dot + 1);
  const snafu::NativeFunction* fn = loaded.module->find(function);
  if (fn == nullptr) return InvocationResult::failure("handler not found: " + request.handler, 0.0, "HandlerNotFound");
  WorkerContext ctx(request.context, loaded.state.get(), request.id, calls);
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  };
  try {
    nlohmann::json value = fn->handler(request.event, ctx);
    return InvocationResult::success(std::move(value), elapsed());
  } catch (const FunctionError& e) {
    return InvocationResult::failure(e.what(), elapsed(), e.type());
  } catch (const std::exception& e) {
    return InvocationResult::failure(e.what(), elapsed(), "Exception");
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <source>\n", argv[0]);
    return 2;
  }
  Loaded loaded;
  loaded.module = snafu::ModuleCatalog::builtin().resolve(argv[1], &loaded.error);
  if (loaded.module) {
    loaded.state = loaded.module->make_state();
  } else {
    std::fprintf(stderr, "cannot load %s: %s\n", argv[1], loaded.error.c_str());
    loaded.error = "cannot load " + std::string(argv[1]) + ": " + loaded.error;
  }

  Calls calls;
  std::mutex threads_mutex;
  std::condition_variable threads_done;
  int running = 0;

  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    nlohmann::json frame;
    try {
      frame = w::parse_frame(line);
      switch (w::classify(frame)) {
        case w::FrameKind::request: {
          auto request = w::decode_request(frame);
          {
            std::lock_guard lock(threads_mutex);
            ++running;
          }
          std::thread([&, request = std::move(request)] {
            const auto result = run(loaded, request, calls);
            try {
              emit(w::encode_response(w::from_result(request.id, result)));
            } catch (const snafu::ProtocolError& e) {
              emit(w::encode_response(
                  w::from_result(request.id, InvocationResult::failure(e.what(), 0.0, "ProtocolError"))));
            }
            std::lock_guard lock(threads_mutex);
            --running;
            threads_done.notify_all();
          }).detach();
          break;
        }
        case w::FrameKind::reply:
          calls.deliver(w::decode_reply(frame));
          break;
        case w::FrameKind::enumerate_request: {
          w::Enumeration e;
          if (loaded.module) {
            for (const auto& fn : loaded.module->functions()) {
              e.functions.push_back(fn.name);
              e.signatures[fn.name] = fn.params;
            }
          }
          emit(w::encode_enumeration(e));
          break;
        }
        default:
          std::fprintf(stderr, "ignoring frame: %s\n", line.c_str());
      }
    } catch (const std::exception& e) {
      std::fprintf(stderr, "bad frame: %s\n", e.what());
    }
  }

  // End of input: let running handlers finish. Nested calls can no longer
  // be answered, so they fail.
  calls.close();
  std::unique_lock lock(threads_mutex);
  threads_done.wait(lock, [&] { return running == 0; });
  return 0;
}
