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

#include "snafu/auth/sigv4.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <utility>

namespace snafu::sigv4 {

namespace {

bool is_unreserved(unsigned char c) {
  return std::isalnum(c) != 0 || c == '-' || c == '.' || c == '_' || c == '~';
}

std::string uri_encode(std::string_view in, bool keep_slash) {
  static constexpr char kDigits[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(in.size());
  for (const unsigned char c : in) {
    if (is_unreserved(c) || (keep_slash && c == '/')) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kDigits[c >> 4]);
      out.push_back(kDigits[c & 0xf]);
    }
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool is_lower_hex(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); });
}

bool is_digits(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
}

std::optional<ParsedAuthHeader> fail(std::string* error, std::string reason) {
  if (error != nullptr) *error = std::move(reason);
  return std::nullopt;
}

std::vector<std::string> headers_to_sign(const http::Request& request) {
  std::vector<std::string> names;
  for (const auto& h : request.headers.items()) {
    auto name = lower(h.name);
    if (name == "authorization") continue;
    names.push_back(std::move(name));
  }
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return names;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i != 0) out.push_back(sep);
    out += parts[i];
  }
  return out;
}

}  // namespace

std::string ParsedAuthHeader::scope() const {
  return date + "/" + region + "/" + service + "/" + std::string(kScopeTerminator);
}

std::optional<ParsedAuthHeader> parse_auth_header(std::string_view header, std::string* error) {
  header = trim(header);
  const auto space = header.find(' ');
  if (space == std::string_view::npos) return fail(error, "missing credential section");
  ParsedAuthHeader out;
  out.algorithm = std::string(header.substr(0, space));
  if (out.algorithm != kAlgorithm) return fail(error, "unsupported algorithm " + out.algorithm);

  std::map<std::string, std::string, std::less<>> parts;
  for (auto item : split(header.substr(space + 1), ',')) {
    item = trim(item);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) return fail(error, "malformed component");
    const std::string key(trim(item.substr(0, eq)));
    if (!parts.emplace(key, std::string(trim(item.substr(eq + 1)))).second) {
      return fail(error, "duplicate component " + key);
    }
  }
  for (const char* key : {"Credential", "SignedHeaders", "Signature"}) {
    if (!parts.count(key)) return fail(error, std::string("missing ") + key);
  }
  if (parts.size() != 3) return fail(error, "unexpected component");

  const auto scope = split(parts["Credential"], '/');
  if (scope.size() != 5) return fail(error, "credential scope must have five parts");
  if (scope[4] != kScopeTerminator) return fail(error, "credential scope must end in aws4_request");
  if (scope[0].empty()) return fail(error, "empty access key id");
  if (scope[1].size() != 8 || !is_digits(scope[1])) return fail(error, "scope date must be YYYYMMDD");
  out.access_key_id = std::string(scope[0]);
  out.date = std::string(scope[1]);
  out.region = std::string(scope[2]);
  out.service = std::string(scope[3]);

  for (const auto name : split(parts["SignedHeaders"], ';')) {
    if (name.empty()) return fail(error, "empty signed header name");
    if (lower(name) != name) return fail(error, "signed header names must be lowercase");
    out.signed_headers.emplace_back(name);
  }
  if (!std::is_sorted(out.signed_headers.begin(), out.signed_headers.end())) {
    return fail(error, "signed headers must be sorted");
  }

  out.signature = parts["Signature"];
  if (out.signature.size() != 64 || !is_lower_hex(out.signature)) {
    return fail(error, "signature must be 64 lowercase hex characters");
  }
  return out;
}

crypto::Digest derive_signing_key(std::string_view secret, std::string_view date,
                                  std::string_view region, std::string_view service) {
  const auto k_date = crypto::hmac_sha256("AWS4" + std::string(secret), date);
  const auto k_region = crypto::hmac_sha256(crypto::as_bytes(k_date), region);
  const auto k_service = crypto::hmac_sha256(crypto::as_bytes(k_region), service);
  return crypto::hmac_sha256(crypto::as_bytes(k_service), kScopeTerminator);
}

std::string canonical_uri(std::string_view raw_path) {
  std::vector<std::string_view> stack;
  for (const auto segment : split(raw_path, '/')) {
    if (segment.empty() || segment == ".") continue;
    if (segment == "..") {
      if (!stack.empty()) stack.pop_back();
      continue;
    }
    stack.push_back(segment);
  }
  std::string path = "/";
  for (std::size_t i = 0; i < stack.size(); ++i) {
    if (i != 0) path.push_back('/');
    path += stack[i];
  }
  if (!stack.empty() && !raw_path.empty() && raw_path.back() == '/') path.push_back('/');
  return uri_encode(path, true);
}

std::string canonical_query(std::string_view raw_query) {
  std::vector<std::pair<std::string, std::string>> params;
  if (!raw_query.empty()) {
    for (const auto item : split(raw_query, '&')) {
      if (item.empty()) continue;
      const auto eq = item.find('=');
      const auto name = item.substr(0, eq);
      const auto value = eq == std::string_view::npos ? std::string_view{} : item.substr(eq + 1);
      params.emplace_back(uri_encode(http::url_decode(name), false),
                          uri_encode(http::url_decode(value), false));
    }
  }
  std::sort(params.begin(), params.end());
  std::string out;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i != 0) out.push_back('&');
    out += params[i].first;
    out.push_back('=');
    out += params[i].second;
  }
  return out;
}

std::string canonical_header_value(std::string_view value) {
  value = trim(value);
  std::string out;
  out.reserve(value.size());
  bool in_space = false;
  for (const char c : value) {
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      if (!in_space) out.push_back(' ');
      in_space = true;
    } else {
      out.push_back(c);
      in_space = false;
    }
  }
  return out;
}

std::optional<std::string> canonical_request(const http::Request& request,
                                             const std::vector<std::string>& signed_headers,
                                             std::string_view payload_hash) {
  std::string out;
  out.reserve(256 + request.target.size());
  out += request.method;
  out.push_back('\n');
  out += canonical_uri(request.path());
  out.push_back('\n');
  out += canonical_query(request.query());
  out.push_back('\n');
  for (const auto& name : signed_headers) {
    const auto values = request.headers.get_all(name);
    if (values.empty()) return std::nullopt;
    out += name;
    out.push_back(':');
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i != 0) out.push_back(',');
      out += canonical_header_value(values[i]);
    }
    out.push_back('\n');
  }
  out.push_back('\n');
  out += join(signed_headers, ';');
  out.push_back('\n');
  out += payload_hash;
  return out;
}

std::string string_to_sign(std::string_view amz_date, std::string_view scope,
                           std::string_view canonical_request) {
  std::string out;
  out += kAlgorithm;
  out.push_back('\n');
  out += amz_date;
  out.push_back('\n');
  out += scope;
  out.push_back('\n');
  out += crypto::sha256_hex(canonical_request);
  return out;
}

std::string authorization_for(const http::Request& request, const SigningParams& params) {
  const std::string amz_date = amz_timestamp(params.time);
  const std::string date = amz_date.substr(0, 8);
  const auto signed_headers = headers_to_sign(request);
  const std::string payload_hash = params.unsigned_payload ? std::string(kUnsignedPayload)
                                                           : crypto::sha256_hex(request.body);
  const auto creq = canonical_request(request, signed_headers, payload_hash);
  const std::string scope =
      date + "/" + params.region + "/" + params.service + "/" + std::string(kScopeTerminator);
  const auto key = derive_signing_key(params.secret_access_key, date, params.region, params.service);
  const auto signature =
      crypto::hex(crypto::hmac_sha256(crypto::as_bytes(key), string_to_sign(amz_date, scope, *creq)));
  return std::string(kAlgorithm) + " Credential=" + params.access_key_id + "/" + scope +
         ", SignedHeaders=" + join(signed_headers, ';') + ", Signature=" + signature;
}

void sign_request(http::Request& request, const SigningParams& params) {
  request.headers.remove("Authorization");
  request.headers.set("X-Amz-Date", amz_timestamp(params.time));
  if (params.content_sha256_header) {
    request.headers.set("x-amz-content-sha256", params.unsigned_payload
                                                    ? std::string(kUnsignedPayload)
                                                    : crypto::sha256_hex(request.body));
  }
  request.headers.add("Authorization", authorization_for(request, params));
}

Verification verify_request(const http::Request& request, const AccountList& accounts,
                            SystemTime now, std::chrono::seconds max_skew) {
  auto reject = [](std::string reason) { return Verification{std::nullopt, std::move(reason)}; };

  const auto auth_values = request.headers.get_all("Authorization");
  if (auth_values.empty()) return reject("missing Authorization header");
  if (auth_values.size() > 1) return reject("multiple Authorization headers");
  std::string error;
  const auto parsed = parse_auth_header(auth_values.front(), &error);
  if (!parsed) return reject("malformed Authorization header: " + error);

  std::string amz_date;
  std::optional<SystemTime> stamp;
  if (const auto x = request.headers.get("X-Amz-Date")) {
    amz_date = std::string(trim(*x));
    stamp = parse_amz_timestamp(amz_date);
  } else if (const auto d = request.headers.get("Date")) {
    stamp = parse_http_date(trim(*d));
    if (stamp) amz_date = amz_timestamp(*stamp);
  } else {
    return reject("missing X-Amz-Date or Date header");
  }
  if (!stamp) return reject("unparseable request timestamp");
  const auto skew = *stamp > now ? *stamp - now : now - *stamp;
  if (skew > max_skew) return reject("request timestamp outside the allowed skew");
  if (amz_date.compare(0, 8, parsed->date) != 0) return reject("credential date does not match request date");

  if (std::find(parsed->signed_headers.begin(), parsed->signed_headers.end(), "host") ==
      parsed->signed_headers.end()) {
    return reject("host header must be signed");
  }

  const Account* account = accounts.find_by_key(parsed->access_key_id);
  if (account == nullptr) return reject("unknown access key id");

  const std::string body_hash = crypto::sha256_hex(request.body);
  std::string payload_hash = body_hash;
  if (const auto declared = request.headers.get("x-amz-content-sha256")) {
    const auto value = trim(*declared);
    if (value == kUnsignedPayload) {
      payload_hash = std::string(kUnsignedPayload);
    } else if (value != body_hash) {
      return reject("payload hash mismatch");
    }
  }

  const auto creq = canonical_request(request, parsed->signed_headers, payload_hash);
  if (!creq) return reject("signed header missing from request");
  const auto key = derive_signing_key(account->secret_access_key, parsed->date, parsed->region,
                                      parsed->service);
  const auto expected = crypto::hex(
      crypto::hmac_sha256(crypto::as_bytes(key), string_to_sign(amz_date, parsed->scope(), *creq)));
  if (!crypto::constant_time_equals(expected, parsed->signature)) return reject("signature mismatch");
  return {account->tenant, {}};
}

}  // namespace snafu::sigv4
