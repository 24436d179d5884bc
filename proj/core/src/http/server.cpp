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

#include "snafu/http/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/eventfd.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <system_error>
#include <vector>

#include <spdlog/spdlog.h>

namespace snafu::http {

namespace {

std::int64_t steady_ns(SteadyTime t) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(t.time_since_epoch()).count();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool send_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

std::string serialize(const Response& response, bool keep_alive) {
  std::string out;
  out.reserve(128 + response.body.size());
  out += "HTTP/1.1 ";
  out += std::to_string(response.status);
  out.push_back(' ');
  out += reason_phrase(response.status);
  out += "\r\n";
  for (const auto& h : response.headers.items()) {
    if (iequals(h.name, "Content-Length") || iequals(h.name, "Connection") ||
        iequals(h.name, "Transfer-Encoding")) {
      continue;
    }
    out += h.name;
    out += ": ";
    out += h.value;
    out += "\r\n";
  }
  out += "Content-Length: ";
  out += std::to_string(response.body.size());
  out += keep_alive ? "\r\nConnection: keep-alive\r\n\r\n" : "\r\nConnection: close\r\n\r\n";
  out += response.body;
  return out;
}

bool parse_size(std::string_view text, int base, std::size_t& out) {
  text = trim(text);
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out, base);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

struct Server::Connection {
  explicit Connection(int f) : fd(f) { touch(ConnectionState::awaiting_request); }

  void touch(ConnectionState s) {
    since_ns = steady_ns(std::chrono::steady_clock::now());
    state = s;
  }

  // Wakes the serving thread, which then closes the descriptor itself.
  void interrupt() {
    std::lock_guard lock(mutex);
    if (!closed) ::shutdown(fd, SHUT_RDWR);
  }

  void close() {
    std::lock_guard lock(mutex);
    if (!closed) {
      ::close(fd);
      closed = true;
    }
  }

  int fd;
  std::mutex mutex;
  bool closed = false;
  std::atomic<ConnectionState> state{ConnectionState::awaiting_request};
  std::atomic<std::int64_t> since_ns{0};
};

Server::Server(ServerOptions options, Handler handler)
    : options_(std::move(options)), handler_(std::move(handler)) {}

Server::~Server() { stop(); }

void Server::start() {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (listen_fd_ < 0) throw std::system_error(errno, std::generic_category(), "socket");
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(options_.port));
  if (::inet_pton(AF_INET, options_.bind_address.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw std::system_error(EINVAL, std::generic_category(), "bind address " + options_.bind_address);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(listen_fd_, SOMAXCONN) != 0) {
    const int err = errno;
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw std::system_error(err, std::generic_category(),
                            "listen on port " + std::to_string(options_.port));
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);

  wake_fd_ = ::eventfd(0, EFD_CLOEXEC | EFD_NONBLOCK);
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
  if (options_.reaper.enabled) reaper_ = std::thread([this] { reaper_loop(); });
}

void Server::stop() {
  if (!running_.exchange(false)) return;
  const std::uint64_t one = 1;
  [[maybe_unused]] auto n = ::write(wake_fd_, &one, sizeof(one));
  {
    std::lock_guard lock(mutex_);
    changed_.notify_all();
  }
  if (acceptor_.joinable()) acceptor_.join();
  if (reaper_.joinable()) reaper_.join();
  ::close(listen_fd_);
  listen_fd_ = -1;

  std::unique_lock lock(mutex_);
  for (auto& [id, conn] : connections_) conn->interrupt();
  changed_.wait(lock, [this] { return connections_.empty(); });
  lock.unlock();
  ::close(wake_fd_);
  wake_fd_ = -1;
}

ServerStats Server::stats() const {
  ServerStats s;
  std::lock_guard lock(mutex_);
  s.open = connections_.size();
  for (const auto& [id, conn] : connections_) {
    const auto state = conn->state.load();
    if (state == ConnectionState::response_written || state == ConnectionState::writing_response) {
      ++s.unread_responses;
    }
  }
  s.accepted = accepted_;
  s.reaped = reaped_;
  return s;
}

std::size_t Server::reap(SteadyTime now) {
  if (!options_.reaper.enabled) return 0;
  const std::int64_t now_ns = steady_ns(now);
  const std::int64_t unread_ns =
      std::chrono::duration_cast<std::chrono::nanoseconds>(options_.reaper.response_unread_timeout).count();
  const std::int64_t idle_ns =
      std::chrono::duration_cast<std::chrono::nanoseconds>(options_.reaper.idle_timeout).count();

  std::vector<std::shared_ptr<Connection>> victims;
  {
    std::lock_guard lock(mutex_);
    for (const auto& [id, conn] : connections_) {
      const std::int64_t age = now_ns - conn->since_ns.load();
      switch (conn->state.load()) {
        case ConnectionState::executing:
          break;
        case ConnectionState::writing_response:
        case ConnectionState::response_written:
          if (age >= unread_ns) victims.push_back(conn);
          break;
        case ConnectionState::awaiting_request:
        case ConnectionState::reading_request:
          if (age >= idle_ns) victims.push_back(conn);
          break;
      }
    }
  }
  for (auto& conn : victims) conn->interrupt();
  reaped_ += victims.size();
  return victims.size();
}

void Server::reaper_loop() {
  std::unique_lock lock(mutex_);
  while (running_) {
    changed_.wait_for(lock, options_.reaper.interval, [this] { return !running_; });
    if (!running_) break;
    lock.unlock();
    reap(std::chrono::steady_clock::now());
    lock.lock();
  }
}

void Server::accept_loop() {
  std::array<pollfd, 2> fds{pollfd{listen_fd_, POLLIN, 0}, pollfd{wake_fd_, POLLIN, 0}};
  while (running_) {
    const int rc = ::poll(fds.data(), fds.size(), -1);
    if (rc < 0) {
      if (errno == EINTR) continue;
      spdlog::error("poll on listening socket: {}", std::strerror(errno));
      break;
    }
    if (fds[1].revents != 0 || !running_) break;
    if ((fds[0].revents & POLLIN) == 0) continue;
    const int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) {
      if (errno == EMFILE || errno == ENFILE) {
        spdlog::warn("accept: {}", std::strerror(errno));
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
      }
      continue;
    }
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    auto conn = std::make_shared<Connection>(fd);
    {
      std::lock_guard lock(mutex_);
      connections_.emplace(next_id_++, conn);
      ++accepted_;
    }
    std::thread([this, conn] { serve(conn); }).detach();
  }
}

void Server::serve(std::shared_ptr<Connection> conn) {
  std::string buf;
  std::array<char, 16 * 1024> chunk{};

  // Reads more bytes into buf; false on EOF, error or interruption.
  auto fill = [&]() -> bool {
    while (true) {
      const ssize_t n = ::recv(conn->fd, chunk.data(), chunk.size(), 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) return false;
      buf.append(chunk.data(), static_cast<std::size_t>(n));
      conn->touch(ConnectionState::reading_request);
      return true;
    }
  };
  auto reply_and_close = [&](int status, std::string_view message) {
    conn->touch(ConnectionState::writing_response);
    send_all(conn->fd, serialize(Response::error(status, message), false));
  };

  while (running_) {
    if (!buf.empty()) conn->touch(ConnectionState::reading_request);
    std::size_t header_end;
    bool ok = true;
    while ((header_end = buf.find("\r\n\r\n")) == std::string::npos) {
      if (buf.size() > options_.max_header_bytes) {
        reply_and_close(431, "request header too large");
        ok = false;
        break;
      }
      if (!fill()) {
        ok = false;
        break;
      }
    }
    if (!ok) break;
    if (header_end > options_.max_header_bytes) {
      reply_and_close(431, "request header too large");
      break;
    }

    Request request;
    {
      std::string_view head(buf.data(), header_end);
      const auto line_end = head.find("\r\n");
      const std::string_view line = head.substr(0, line_end);
      const auto sp1 = line.find(' ');
      const auto sp2 = line.rfind(' ');
      if (sp1 == std::string_view::npos || sp2 == sp1) {
        reply_and_close(400, "malformed request line");
        break;
      }
      request.method = std::string(line.substr(0, sp1));
      request.target = std::string(line.substr(sp1 + 1, sp2 - sp1 - 1));
      request.version = std::string(line.substr(sp2 + 1));
      if (request.version.rfind("HTTP/1.", 0) != 0 || request.target.empty()) {
        reply_and_close(400, "malformed request line");
        break;
      }
      std::string_view rest = line_end == std::string_view::npos ? std::string_view{}
                                                                  : head.substr(line_end + 2);
      bool bad = false;
      while (!rest.empty()) {
        const auto eol = rest.find("\r\n");
        const auto header = rest.substr(0, eol);
        rest = eol == std::string_view::npos ? std::string_view{} : rest.substr(eol + 2);
        const auto colon = header.find(':');
        if (colon == std::string_view::npos || colon == 0) {
          bad = true;
          break;
        }
        request.headers.add(std::string(trim(header.substr(0, colon))),
                            std::string(trim(header.substr(colon + 1))));
      }
      if (bad) {
        reply_and_close(400, "malformed header");
        break;
      }
    }
    buf.erase(0, header_end + 4);

    if (const auto expect = request.headers.get("Expect"); expect && iequals(*expect, "100-continue")) {
      if (!send_all(conn->fd, "HTTP/1.1 100 Continue\r\n\r\n")) break;
    }

    const auto te = request.headers.get("Transfer-Encoding");
    if (te && iequals(trim(*te), "chunked")) {
      while (ok) {
        std::size_t eol;
        while ((eol = buf.find("\r\n")) == std::string::npos) {
          if (!fill()) {
            ok = false;
            break;
          }
        }
        if (!ok) break;
        std::string_view size_line(buf.data(), eol);
        size_line = size_line.substr(0, size_line.find(';'));
        std::size_t size = 0;
        if (!parse_size(size_line, 16, size) || request.body.size() + size > options_.max_body_bytes) {
          reply_and_close(400, "bad chunk");
          ok = false;
          break;
        }
        buf.erase(0, eol + 2);
        if (size == 0) {
          // Trailers end with an empty line.
          while (true) {
            while ((eol = buf.find("\r\n")) == std::string::npos) {
              if (!fill()) {
                ok = false;
                break;
              }
            }
            if (!ok) break;
            buf.erase(0, eol + 2);
            if (eol == 0) break;
          }
          break;
        }
        while (buf.size() < size + 2) {
          if (!fill()) {
            ok = false;
            break;
          }
        }
        if (!ok) break;
        request.body.append(buf, 0, size);
        buf.erase(0, size + 2);
      }
      if (!ok) break;
    } else if (const auto cl = request.headers.get("Content-Length")) {
      std::size_t length = 0;
      if (!parse_size(*cl, 10, length)) {
        reply_and_close(400, "bad Content-Length");
        break;
      }
      if (length > options_.max_body_bytes) {
        reply_and_close(413, "request body too large");
        break;
      }
      while (buf.size() < length) {
        if (!fill()) {
          ok = false;
          break;
        }
      }
      if (!ok) break;
      request.body = buf.substr(0, length);
      buf.erase(0, length);
    }

    bool keep_alive = request.version == "HTTP/1.1";
    if (const auto c = request.headers.get("Connection")) {
      if (iequals(trim(*c), "close")) keep_alive = false;
      if (iequals(trim(*c), "keep-alive")) keep_alive = true;
    }

    conn->touch(ConnectionState::executing);
    Response response;
    try {
      response = handler_(request);
    } catch (const std::exception& e) {
      spdlog::error("request handler failed: {}", e.what());
      response = Response::error(500, "internal error");
    }
    conn->touch(ConnectionState::writing_response);
    if (!send_all(conn->fd, serialize(response, keep_alive && running_))) break;
    conn->touch(ConnectionState::response_written);
    if (!keep_alive) break;
  }

  conn->close();
  std::lock_guard lock(mutex_);
  for (auto it = connections_.begin(); it != connections_.end(); ++it) {
    if (it->second == conn) {
      connections_.erase(it);
      break;
    }
  }
  changed_.notify_all();
}

}  // namespace snafu::http
