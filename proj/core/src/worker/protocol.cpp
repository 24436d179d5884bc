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

#include "snafu/worker/protocol.hpp"

#include "snafu/common/error.hpp"

namespace snafu::worker {

namespace {

using nlohmann::json;

// Keys are emitted in the documented order, so lines are assembled by hand
// around dumped values.
std::string dump(const json& value) {
  try {
    return value.dump();
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("value not serializable: ") + e.what());
  }
}

std::string json_string(std::string_view s) { return dump(json(std::string(s))); }

std::string number(double v) { return dump(json(v)); }

const json& field(const json& frame, const char* key) {
  const auto it = frame.find(key);
  if (it == frame.end()) throw ProtocolError(std::string("frame lacks \"") + key + "\"");
  return *it;
}

std::string string_field(const json& frame, const char* key) {
  const auto& v = field(frame, key);
  if (!v.is_string()) throw ProtocolError(std::string("\"") + key + "\" must be a string");
  return v.get<std::string>();
}

bool status_field(const json& frame) {
  const auto s = string_field(frame, "status");
  if (s == "ok") return true;
  if (s == "error") return false;
  throw ProtocolError("status must be \"ok\" or \"error\"");
}

void expect_object(const json& frame) {
  if (!frame.is_object()) throw ProtocolError("frame is not a JSON object");
}

}  // namespace

std::string encode_request(const WorkerRequest& r) {
  std::string line = "{\"id\":" + json_string(r.id) + ",\"handler\":" + json_string(r.handler) +
                     ",\"event\":" + dump(r.event) + ",\"context\":" + dump(r.context.to_json()) +
                     "}\n";
  return line;
}

std::string encode_response(const WorkerResponse& r) {
  std::string line = "{\"id\":" + json_string(r.id) + ",\"status\":" + (r.ok ? "\"ok\"" : "\"error\"");
  if (r.ok) {
    line += ",\"result\":" + dump(r.result);
  } else {
    line += ",\"message\":" + json_string(r.message);
    if (!r.type.empty()) line += ",\"type\":" + json_string(r.type);
  }
  line += ",\"duration_ms\":" + number(r.duration_ms) + "}\n";
  return line;
}

std::string encode_callback(const CallbackRequest& c) {
  return "{\"op\":\"invoke\",\"id\":" + json_string(c.id) + ",\"call\":" + json_string(c.call) +
         ",\"target\":" + json_string(c.target) + ",\"event\":" + dump(c.event) + "}\n";
}

std::string encode_reply(const CallbackReply& r) {
  std::string line = "{\"op\":\"reply\",\"call\":" + json_string(r.call) +
                     ",\"status\":" + (r.ok ? "\"ok\"" : "\"error\"");
  if (r.ok) {
    line += ",\"result\":" + dump(r.result);
  } else {
    line += ",\"message\":" + json_string(r.message);
    if (!r.type.empty()) line += ",\"type\":" + json_string(r.type);
  }
  return line + "}\n";
}

std::string encode_enumerate_request() { return "{\"op\":\"enumerate\"}\n"; }

std::string encode_enumeration(const Enumeration& e) {
  json signatures = json::object();
  for (const auto& [name, params] : e.signatures) signatures[name] = params;
  return "{\"op\":\"enumerate\",\"functions\":" + dump(e.functions) +
         ",\"signatures\":" + dump(signatures) + "}\n";
}

json parse_frame(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed frame: ") + e.what());
  }
}

FrameKind classify(const json& frame) {
  if (!frame.is_object()) return FrameKind::unknown;
  const auto op = frame.find("op");
  if (op != frame.end()) {
    if (!op->is_string()) return FrameKind::unknown;
    const auto& s = op->get_ref<const std::string&>();
    if (s == "invoke") return FrameKind::callback;
    if (s == "reply") return FrameKind::reply;
    if (s == "enumerate") {
      return frame.contains("functions") ? FrameKind::enumeration : FrameKind::enumerate_request;
    }
    return FrameKind::unknown;
  }
  if (frame.contains("status")) return FrameKind::response;
  if (frame.contains("handler")) return FrameKind::request;
  return FrameKind::unknown;
}

WorkerRequest decode_request(const json& frame) {
  expect_object(frame);
  WorkerRequest r;
  r.id = string_field(frame, "id");
  r.handler = string_field(frame, "handler");
  r.event = field(frame, "event");
  r.context = InvocationContext::from_json(field(frame, "context"));
  return r;
}

WorkerResponse decode_response(const json& frame) {
  expect_object(frame);
  WorkerResponse r;
  r.id = string_field(frame, "id");
  r.ok = status_field(frame);
  const bool has_result = frame.contains("result");
  const bool has_message = frame.contains("message");
  if (r.ok) {
    if (!has_result || has_message) throw ProtocolError("ok response needs result and no message");
    r.result = frame["result"];
  } else {
    if (has_result || !has_message) throw ProtocolError("error response needs message and no result");
    r.message = string_field(frame, "message");
    if (frame.contains("type")) r.type = string_field(frame, "type");
  }
  const auto& d = field(frame, "duration_ms");
  if (!d.is_number()) throw ProtocolError("duration_ms must be a number");
  r.duration_ms = d.get<double>();
  return r;
}

CallbackRequest decode_callback(const json& frame) {
  expect_object(frame);
  CallbackRequest c;
  c.id = string_field(frame, "id");
  c.call = string_field(frame, "call");
  c.target = string_field(frame, "target");
  c.event = frame.contains("event") ? frame["event"] : json::object();
  return c;
}

CallbackReply decode_reply(const json& frame) {
  expect_object(frame);
  CallbackReply r;
  r.call = string_field(frame, "call");
  r.ok = status_field(frame);
  if (r.ok) {
    r.result = field(frame, "result");
  } else {
    r.message = string_field(frame, "message");
    if (frame.contains("type")) r.type = string_field(frame, "type");
  }
  return r;
}

Enumeration decode_enumeration(const json& frame) {
  expect_object(frame);
  Enumeration e;
  try {
    e.functions = field(frame, "functions").get<std::vector<std::string>>();
    if (frame.contains("signatures")) {
      e.signatures = frame["signatures"].get<std::map<std::string, std::vector<std::string>>>();
    }
  } catch (const json::exception& ex) {
    throw ProtocolError(std::string("bad enumeration: ") + ex.what());
  }
  return e;
}

InvocationResult to_result(const WorkerResponse& r) {
  if (r.ok) return InvocationResult::success(r.result, r.duration_ms);
  return InvocationResult::failure(r.message, r.duration_ms, r.type.empty() ? "FunctionError" : r.type);
}

WorkerResponse from_result(std::string id, const InvocationResult& result) {
  WorkerResponse r;
  r.id = std::move(id);
  r.ok = result.ok();
  if (r.ok) {
    r.result = result.value;
  } else {
    r.message = result.error_message;
    r.type = result.error_type;
  }
  r.duration_ms = result.duration_ms;
  return r;
}

}  // namespace snafu::worker
