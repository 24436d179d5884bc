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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "snafu/auth/accounts.hpp"
#include "snafu/auth/crypto.hpp"
#include "snafu/common/time.hpp"
#include "snafu/http/message.hpp"

namespace snafu::sigv4 {

inline constexpr std::string_view kAlgorithm = "AWS4-HMAC-SHA256";
inline constexpr std::string_view kUnsignedPayload = "UNSIGNED-PAYLOAD";
inline constexpr std::string_view kScopeTerminator = "aws4_request";
inline constexpr std::chrono::minutes kDefaultMaxSkew{15};

struct ParsedAuthHeader {
  std::string algorithm;
  std::string access_key_id;
  std::string date;  // YYYYMMDD
  std::string region;
  std::string service;
  std::vector<std::string> signed_headers;
  std::string signature;

  std::string scope() const;
  friend bool operator==(const ParsedAuthHeader&, const ParsedAuthHeader&) = default;
};

// Parses "AWS4-HMAC-SHA256 Credential=<akid>/<date>/<region>/<service>/aws4_request,
// SignedHeaders=<h1;h2>, Signature=<hex>". Nullopt when malformed; `error`
// says what was wrong.
std::optional<ParsedAuthHeader> parse_auth_header(std::string_view header,
                                                  std::string* error = nullptr);

crypto::Digest derive_signing_key(std::string_view secret, std::string_view date,
                                  std::string_view region, std::string_view service);

// Normalized, URI-encoded path: dot segments and empty segments removed,
// every byte outside the unreserved set and '/' percent-encoded.
std::string canonical_uri(std::string_view raw_path);
// Parameters decoded, re-encoded and sorted by name, then value.
std::string canonical_query(std::string_view raw_query);
// Trimmed value with inner whitespace runs (folded lines included)
// collapsed to one space.
std::string canonical_header_value(std::string_view value);

// Nullopt when a signed header is absent from the request.
std::optional<std::string> canonical_request(const http::Request& request,
                                             const std::vector<std::string>& signed_headers,
                                             std::string_view payload_hash);

std::string string_to_sign(std::string_view amz_date, std::string_view scope,
                           std::string_view canonical_request);

struct SigningParams {
  std::string access_key_id;
  std::string secret_access_key;
  std::string region{"us-east-1"};
  std::string service{"lambda"};
  SystemTime time = std::chrono::system_clock::now();
  // Sign with UNSIGNED-PAYLOAD instead of the body hash.
  bool unsigned_payload = false;
  // Also send the payload hash as x-amz-content-sha256.
  bool content_sha256_header = false;
};

// Sets X-Amz-Date (and x-amz-content-sha256 when asked) and adds the
// Authorization header. Every header present is signed. The request must
// carry a Host header.
void sign_request(http::Request& request, const SigningParams& params);

// The Authorization value sign_request would add, without touching the
// request. Headers are signed as they stand.
std::string authorization_for(const http::Request& request, const SigningParams& params);

struct Verification {
  std::optional<std::string> tenant;
  std::string reason;  // set when rejected

  bool ok() const { return tenant.has_value(); }
};

// Header-based SigV4 verification against `accounts`. Rejects unknown keys,
// malformed or stale requests, payload hash mismatches and bad signatures.
Verification verify_request(const http::Request& request, const AccountList& accounts,
                            SystemTime now = std::chrono::system_clock::now(),
                            std::chrono::seconds max_skew = kDefaultMaxSkew);

}  // namespace snafu::sigv4
