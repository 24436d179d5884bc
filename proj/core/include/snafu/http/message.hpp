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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace snafu::http {

struct Header {
  std::string name;
  std::string value;

  friend bool operator==(const Header&, const Header&) = default;
};

bool iequals(std::string_view a, std::string_view b);

// Header list with case-insensitive lookup; order and duplicates preserved.
class Headers {
 public:
  std::optional<std::string_view> get(std::string_view name) const;
  std::vector<std::string_view> get_all(std::string_view name) const;
  bool contains(std::string_view name) const { return get(name).has_value(); }
  void add(std::string name, std::string value);
  void set(std::string_view name, std::string value);
  void remove(std::string_view name);

  const std::vector<Header>& items() const { return items_; }
  std::vector<Header>& items() { return items_; }

 private:
  std::vector<Header> items_;
};

struct Request {
  std::string method;
  // Raw request-target as received or to be sent: path plus optional query.
  std::string target;
  std::string version{"HTTP/1.1"};
  Headers headers;
  std::string body;

  std::string_view path() const;
  std::string_view query() const;
};

struct Response {
  int status = 200;
  Headers headers;
  std::string body;

  static Response json(int status, const nlohmann::json& body);
  static Response error(int status, std::string_view message);
};

std::string_view reason_phrase(int status);

// Percent-decoding; '+' is left alone. Invalid escapes pass through verbatim.
std::string url_decode(std::string_view in);

// Splits "http://host:port/base" into its parts.
struct Endpoint {
  std::string host;
  int port = 80;
  std::string base_path;

  static std::optional<Endpoint> parse(std::string_view url);
  std::string url() const;
};

}  // namespace snafu::http
