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

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "snafu/common/time.hpp"
#include "snafu/http/message.hpp"

namespace snafu::http {

// Lifecycle of one server-side connection, as the reaper sees it.
enum class ConnectionState {
  awaiting_request,   // no bytes of the next request yet
  reading_request,    // part of a request received
  executing,          // handler running; never reaped
  writing_response,   // send in progress
  response_written,   // response sent, peer has neither sent more nor closed
};

struct ReaperOptions {
  bool enabled = false;
  // A written response the peer has not followed up (new request or close)
  // within this window counts as unread; the connection is closed.
  std::chrono::milliseconds response_unread_timeout{5000};
  // Connections without request bytes for this long are closed.
  std::chrono::milliseconds idle_timeout{60000};
  std::chrono::milliseconds interval{1000};
};

struct ServerOptions {
  std::string bind_address{"0.0.0.0"};
  int port = 0;  // 0 picks an ephemeral port
  ReaperOptions reaper;
  std::size_t max_header_bytes = 64 * 1024;
  std::size_t max_body_bytes = 64 * 1024 * 1024;
};

struct ServerStats {
  std::size_t open = 0;
  std::size_t unread_responses = 0;
  std::uint64_t accepted = 0;
  std::uint64_t reaped = 0;
};

using Handler = std::function<Response(const Request& request)>;

// HTTP/1.1 server with one thread per connection, keep-alive, and an
// optional reaper thread that closes connections stuck after their response
// or idle without a request.
class Server {
 public:
  Server(ServerOptions options, Handler handler);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and starts accepting. Throws std::system_error.
  void start();
  // Stops accepting, closes every connection and waits for their threads.
  void stop();

  int port() const { return port_; }
  ServerStats stats() const;

  // One reaper pass at `now`; returns the number of connections closed.
  // Does nothing when the reaper is disabled.
  std::size_t reap(SteadyTime now);

 private:
  struct Connection;

  void accept_loop();
  void reaper_loop();
  void serve(std::shared_ptr<Connection> conn);

  ServerOptions options_;
  Handler handler_;
  int listen_fd_ = -1;
  int wake_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::thread reaper_;

  mutable std::mutex mutex_;
  std::condition_variable changed_;
  std::map<std::uint64_t, std::shared_ptr<Connection>> connections_;
  std::uint64_t next_id_ = 1;
  std::uint64_t accepted_ = 0;
  std::atomic<std::uint64_t> reaped_{0};
};

}  // namespace snafu::http
