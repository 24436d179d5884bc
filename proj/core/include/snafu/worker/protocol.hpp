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

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "snafu/execution/types.hpp"

// Host <-> worker wire format: one UTF-8 JSON object per line.
//
//   host -> worker  {"id","handler","event","context"}       run a handler
//   worker -> host  {"id","status","result"|"message",        its outcome
//                    ["type",] "duration_ms"}
//   worker -> host  {"op":"invoke","id","call","target","event"}
//                                                             nested call made
//                                                             by request `id`
//   host -> worker  {"op":"reply","call","status","result"|"message"}
//   host -> worker  {"op":"enumerate"}
//   worker -> host  {"op":"enumerate","functions":[...],"signatures":{...}}
namespace snafu::worker {

struct WorkerRequest {
  std::string id;
  std::string handler;
  nlohmann::json event;
  InvocationContext context;

  friend bool operator==(const WorkerRequest&, const WorkerRequest&) = default;
};

struct WorkerResponse {
  std::string id;
  bool ok = true;
  nlohmann::json result;  // iff ok
  std::string message;    // iff !ok
  std::string type;       // error type name, optional
  double duration_ms = 0.0;

  friend bool operator==(const WorkerResponse&, const WorkerResponse&) = default;
};

struct CallbackRequest {
  std::string id;    // request on whose behalf the call is made
  std::string call;  // unique per worker
  std::string target;
  nlohmann::json event;

  friend bool operator==(const CallbackRequest&, const CallbackRequest&) = default;
};

struct CallbackReply {
  std::string call;
  bool ok = true;
  nlohmann::json result;
  std::string message;
  std::string type;

  friend bool operator==(const CallbackReply&, const CallbackReply&) = default;
};

struct Enumeration {
  std::vector<std::string> functions;
  std::map<std::string, std::vector<std::string>> signatures;

  friend bool operator==(const Enumeration&, const Enumeration&) = default;
};

enum class FrameKind { request, response, callback, reply, enumerate_request, enumeration, unknown };

// Every encoder returns exactly one line ending in '\n' and throws
// ProtocolError when a value cannot be serialized (invalid UTF-8).
std::string encode_request(const WorkerRequest& request);
std::string encode_response(const WorkerResponse& response);
std::string encode_callback(const CallbackRequest& callback);
std::string encode_reply(const CallbackReply& reply);
std::string encode_enumerate_request();
std::string encode_enumeration(const Enumeration& enumeration);

// Parses one line (trailing '\n' optional). Throws ProtocolError.
nlohmann::json parse_frame(std::string_view line);
FrameKind classify(const nlohmann::json& frame);

// Decoders throw ProtocolError on missing or mistyped keys.
WorkerRequest decode_request(const nlohmann::json& frame);
WorkerResponse decode_response(const nlohmann::json& frame);
CallbackRequest decode_callback(const nlohmann::json& frame);
CallbackReply decode_reply(const nlohmann::json& frame);
Enumeration decode_enumeration(const nlohmann::json& frame);

inline WorkerRequest decode_request_line(std::string_view line) { return decode_request(parse_frame(line)); }
inline WorkerResponse decode_response_line(std::string_view line) {
  return decode_response(parse_frame(line));
}

// Response-side conversions.
InvocationResult to_result(const WorkerResponse& response);
WorkerResponse from_result(std::string id, const InvocationResult& result);

}  // namespace snafu::worker
