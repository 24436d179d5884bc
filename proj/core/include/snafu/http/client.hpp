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

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "snafu/http/message.hpp"

namespace snafu::http {

// A single keep-alive connection to one endpoint. Not thread-safe: one
// caller at a time, which is what ConnectionPool hands out.
class Client {
 public:
  explicit Client(Endpoint endpoint,
                  std::chrono::milliseconds read_timeout = std::chrono::seconds(60));
  ~Client();
  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  struct Result {
    std::optional<Response> response;
    std::string error;  // transport failure description when no response
  };

  // Sends `request`; its target is appended to the endpoint's base path.
  // A Host header is added when absent.
  Result send(const Request& request);

  const Endpoint& endpoint() const { return endpoint_; }

 private:
  struct Impl;
  Endpoint endpoint_;
  std::unique_ptr<Impl> impl_;
};

// Idle connections per endpoint URL. Holding connections across calls is
// what makes repeated nested invocations cheap; a fresh pool means fresh
// connections.
class ConnectionPool {
 public:
  class Lease {
   public:
    Lease(ConnectionPool* pool, std::string url, std::unique_ptr<Client> client)
        : pool_(pool), url_(std::move(url)), client_(std::move(client)) {}
    Lease(Lease&&) = default;
    Lease& operator=(Lease&&) = default;
    ~Lease();
    Client& operator*() { return *client_; }
    Client* operator->() { return client_.get(); }
    // Drop the connection instead of returning it to the pool.
    void discard() { client_.reset(); }

   private:
    ConnectionPool* pool_;
    std::string url_;
    std::unique_ptr<Client> client_;
  };

  explicit ConnectionPool(std::chrono::milliseconds read_timeout = std::chrono::seconds(60))
      : read_timeout_(read_timeout) {}

  // Nullopt when `url` does not parse.
  std::optional<Lease> acquire(const std::string& url);
  std::size_t idle_count() const;
  std::size_t created_count() const;

 private:
  void release(const std::string& url, std::unique_ptr<Client> client);

  std::chrono::milliseconds read_timeout_;
  mutable std::mutex mutex_;
  std::map<std::string, std::vector<std::unique_ptr<Client>>> idle_;
  std::size_t created_ = 0;
};

}  // namespace snafu::http
