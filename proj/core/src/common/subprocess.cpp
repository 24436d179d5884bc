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

#include "snafu/common/subprocess.hpp"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <mutex>
#include <system_error>
#include <thread>

extern char** environ;

namespace snafu {

namespace {

struct Pipe {
  int read_end = -1;
  int write_end = -1;
};

Pipe make_pipe() {
  std::array<int, 2> fds{};
  if (::pipe2(fds.data(), O_CLOEXEC) != 0) {
    throw std::system_error(errno, std::generic_category(), "pipe2");
  }
  return {fds[0], fds[1]};
}

void close_fd(int& fd) {
  if (fd >= 0) {
    ::close(fd);
    fd = -1;
  }
}

int decode_status(int status) {
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return -1;
}

class FileActions {
 public:
  FileActions() { posix_spawn_file_actions_init(&actions_); }
  ~FileActions() { posix_spawn_file_actions_destroy(&actions_); }
  FileActions(const FileActions&) = delete;
  FileActions& operator=(const FileActions&) = delete;
  posix_spawn_file_actions_t* get() { return &actions_; }

 private:
  posix_spawn_file_actions_t actions_;
};

}  // namespace

Subprocess::Subprocess(Subprocess&& other) noexcept
    : pid_(other.pid_),
      stdin_fd_(other.stdin_fd_),
      stdout_fd_(other.stdout_fd_),
      stderr_fd_(other.stderr_fd_),
      exit_status_(other.exit_status_) {
  other.pid_ = -1;
  other.stdin_fd_ = other.stdout_fd_ = other.stderr_fd_ = -1;
}

Subprocess& Subprocess::operator=(Subprocess&& other) noexcept {
  if (this != &other) {
    reset();
    pid_ = other.pid_;
    stdin_fd_ = other.stdin_fd_;
    stdout_fd_ = other.stdout_fd_;
    stderr_fd_ = other.stderr_fd_;
    exit_status_ = other.exit_status_;
    other.pid_ = -1;
    other.stdin_fd_ = other.stdout_fd_ = other.stderr_fd_ = -1;
  }
  return *this;
}

Subprocess::~Subprocess() { reset(); }

void Subprocess::reset() noexcept {
  close_fd(stdin_fd_);
  if (pid_ > 0 && !exit_status_) {
    ::kill(pid_, SIGKILL);
    int status = 0;
    while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
    }
  }
  close_fd(stdout_fd_);
  close_fd(stderr_fd_);
  pid_ = -1;
  exit_status_.reset();
}

Subprocess Subprocess::spawn(const std::vector<std::string>& argv, const Options& options) {
  // A worker that dies with unread input must not take the host down.
  static std::once_flag sigpipe_once;
  std::call_once(sigpipe_once, [] { ::signal(SIGPIPE, SIG_IGN); });
  if (argv.empty()) throw std::system_error(EINVAL, std::generic_category(), "empty argv");

  Pipe in, out, err;
  auto cleanup = [&] {
    close_fd(in.read_end);
    close_fd(in.write_end);
    close_fd(out.read_end);
    close_fd(out.write_end);
    close_fd(err.read_end);
    close_fd(err.write_end);
  };

  FileActions actions;
  try {
    if (options.pipe_stdin) {
      in = make_pipe();
      posix_spawn_file_actions_adddup2(actions.get(), in.read_end, STDIN_FILENO);
    }
    if (options.pipe_stdout) {
      out = make_pipe();
      posix_spawn_file_actions_adddup2(actions.get(), out.write_end, STDOUT_FILENO);
    } else if (!options.stdout_file.empty()) {
      posix_spawn_file_actions_addopen(actions.get(), STDOUT_FILENO, options.stdout_file.c_str(),
                                       O_WRONLY | O_CREAT | O_APPEND, 0644);
    }
    if (options.pipe_stderr) {
      err = make_pipe();
      posix_spawn_file_actions_adddup2(actions.get(), err.write_end, STDERR_FILENO);
    } else if (!options.stderr_file.empty()) {
      posix_spawn_file_actions_addopen(actions.get(), STDERR_FILENO, options.stderr_file.c_str(),
                                       O_WRONLY | O_CREAT | O_APPEND, 0644);
    }
  } catch (...) {
    cleanup();
    throw;
  }
  posix_spawn_file_actions_addclosefrom_np(actions.get(), 3);

  std::vector<char*> args;
  args.reserve(argv.size() + 1);
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  // Overrides first: getenv() returns the first match.
  std::vector<std::string> env_storage = options.extra_env;
  std::vector<char*> env;
  for (auto& e : env_storage) env.push_back(e.data());
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) env.push_back(*e);
  env.push_back(nullptr);

  pid_t pid = -1;
  const int rc = ::posix_spawn(&pid, args[0], actions.get(), nullptr, args.data(), env.data());
  if (rc != 0) {
    cleanup();
    throw std::system_error(rc, std::generic_category(), "spawn " + argv[0]);
  }

  Subprocess proc;
  proc.pid_ = pid;
  close_fd(in.read_end);
  close_fd(out.write_end);
  close_fd(err.write_end);
  proc.stdin_fd_ = in.write_end;
  proc.stdout_fd_ = out.read_end;
  proc.stderr_fd_ = err.read_end;
  return proc;
}

void Subprocess::close_stdin() { close_fd(stdin_fd_); }

std::optional<int> Subprocess::try_wait() {
  if (exit_status_ || pid_ <= 0) return exit_status_;
  int status = 0;
  const pid_t r = ::waitpid(pid_, &status, WNOHANG);
  if (r == pid_) exit_status_ = decode_status(status);
  return exit_status_;
}

int Subprocess::wait() {
  if (exit_status_ || pid_ <= 0) return exit_status_.value_or(-1);
  int status = 0;
  pid_t r;
  do {
    r = ::waitpid(pid_, &status, 0);
  } while (r < 0 && errno == EINTR);
  exit_status_ = r == pid_ ? decode_status(status) : -1;
  return *exit_status_;
}

void Subprocess::kill(int signal_number) {
  if (pid_ > 0 && !exit_status_) ::kill(pid_, signal_number);
}

void Subprocess::terminate(std::chrono::milliseconds grace) {
  if (pid_ <= 0 || try_wait()) return;
  ::kill(pid_, SIGTERM);
  const auto deadline = std::chrono::steady_clock::now() + grace;
  while (std::chrono::steady_clock::now() < deadline) {
    if (try_wait()) return;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  ::kill(pid_, SIGKILL);
  wait();
}

bool write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

std::optional<std::string> LineReader::next() {
  for (;;) {
    const auto pos = buffer_.find('\n', scan_from_);
    if (pos != std::string::npos) {
      std::string line = buffer_.substr(0, pos);
      buffer_.erase(0, pos + 1);
      scan_from_ = 0;
      return line;
    }
    scan_from_ = buffer_.size();
    if (eof_) {
      if (buffer_.empty()) return std::nullopt;
      std::string line = std::move(buffer_);
      buffer_.clear();
      scan_from_ = 0;
      return line;
    }
    std::array<char, 8192> chunk{};
    const ssize_t n = ::read(fd_, chunk.data(), chunk.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      eof_ = true;
    } else if (n == 0) {
      eof_ = true;
    } else {
      buffer_.append(chunk.data(), static_cast<std::size_t>(n));
    }
  }
}

}  // namespace snafu
