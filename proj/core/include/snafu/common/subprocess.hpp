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

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace snafu {

// Owns a child process started with posix_spawn. Descriptors above stderr
// are closed in the child. Destruction kills and reaps a still-running
// child.
class Subprocess {
 public:
  struct Options {
    bool pipe_stdin = false;
    bool pipe_stdout = false;
    bool pipe_stderr = false;
    // Used only when the matching pipe flag is off. Empty means inherit.
    std::string stdout_file;
    std::string stderr_file;
    std::vector<std::string> extra_env;  // "KEY=VALUE"
  };

  Subprocess() = default;
  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;
  Subprocess(Subprocess&& other) noexcept;
  Subprocess& operator=(Subprocess&& other) noexcept;
  ~Subprocess();

  // Throws std::system_error when the executable cannot be started.
  static Subprocess spawn(const std::vector<std::string>& argv, const Options& options);

  pid_t pid() const noexcept { return pid_; }
  int stdin_fd() const noexcept { return stdin_fd_; }
  int stdout_fd() const noexcept { return stdout_fd_; }
  int stderr_fd() const noexcept { return stderr_fd_; }

  void close_stdin();

  // Non-blocking. Returns the exit status once the child is gone.
  std::optional<int> try_wait();
  int wait();
  bool running() { return !try_wait().has_value(); }

  void kill(int signal_number);
  // SIGTERM, then SIGKILL after `grace`.
  void terminate(std::chrono::milliseconds grace = std::chrono::milliseconds(2000));

 private:
  void reset() noexcept;

  pid_t pid_ = -1;
  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
  int stderr_fd_ = -1;
  std::optional<int> exit_status_;
};

// Writes all of `data`, retrying on EINTR and short writes. Returns false on
// error (EPIPE included).
bool write_all(int fd, std::string_view data);

// Buffered line reader over a descriptor it does not own.
class LineReader {
 public:
  explicit LineReader(int fd) : fd_(fd) {}

  // Next line without the trailing '\n'; nullopt at end of input or error.
  std::optional<std::string> next();

 private:
  int fd_;
  std::string buffer_;
  std::size_t scan_from_ = 0;
  bool eof_ = false;
};

}  // namespace snafu
