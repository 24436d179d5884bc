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

#include "snafu/http/client.hpp"

#include <httplib.h>

namespace snafu::http {

struct Client::Impl {
  explicit Impl(const Endpoint& ep) : cli(ep.host, ep.port) {}
  httplib::Client cli;
};

Client::Client(Endpoint endpoint, std::chrono::milliseconds read_timeout)
    : endpoint_(std::move(endpoint)), impl_(std::make_unique<Impl>(endpoint_)) {
  impl_->cli.set_keep_alive(true);
  impl_->cli.set_tcp_nodelay(true);
  impl_->cli.set_url_encode(false);
  impl_->cli.set_read_timeout(read_timeout);
  impl_->cli.set_write_timeout(std::chrono::seconds(10));
  impl_->cli.set_connection_timeout(std::chrono::seconds(5));
}

Client::~Client() = default;

Client::Result Client::send(const Request& request) {
  httplib::Request req;
  req.method = request.method;
  req.path = endpoint_.base_path + request.target;
  for (const auto& h : request.headers.items()) req.headers.emplace(h.name, h.value);
  if (!request.headers.contains("Host")) {
    req.headers.emplace("Host", endpoint_.host + ":" + std::to_string(endpoint_.port));
  }
  req.body = request.body;

  httplib::Response res;
  httplib::Error err = httplib::Error::Success;
  if (!impl_->cli.send(req, res, err)) {
    return {std::nullopt, httplib::to_string(err)};
  }
  Response out;
  out.status = res.status;
  for (const auto& [k, v] : res.headers) out.headers.add(k, v);
  out.body = std::move(res.body);
  return {std::move(out), {}};
}

ConnectionPool::Lease::~Lease() {
  if (pool_ != nullptr && client_) pool_->release(url_, std::move(client_));
}

std::optional<ConnectionPool::Lease> ConnectionPool::acquire(const std::string& url) {
  {
    std::lock_guard lock(mutex_);
    auto it = idle_.find(url);
    if (it != idle_.end() && !it->second.empty()) {
      auto client = std::move(it->second.back());
      it->second.pop_back();
      return Lease(this, url, std::move(client));
    }
  }
  auto ep = Endpoint::parse(url);
  if (!ep) return std::nullopt;
  auto client = std::make_unique<Client>(std::move(*ep), read_timeout_);
  {
    std::lock_guard lock(mutex_);
    ++created_;
  }
  return Lease(this, url, std::move(client));
}

void ConnectionPool::release(const std::string& url, std::unique_ptr<Client> client) {
  std::lock_guard lock(mutex_);
  idle_[url].push_back(std::move(client));
}

std::size_t ConnectionPool::idle_count() const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& [url, v] : idle_) n += v.size();
  return n;
}

std::size_t ConnectionPool::created_count() const {
  std::lock_guard lock(mutex_);
  return created_;
}

}  // namespace snafu::http
