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

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "snafu/auth/accounts.hpp"
#include "snafu/http/message.hpp"

namespace snafu {

enum class AuthMode { none, accounts, aws4 };

std::string_view to_string(AuthMode mode);
std::optional<AuthMode> parse_auth_mode(std::string_view text);

// Header carrying the shared secret in accounts mode.
inline constexpr std::string_view kAuthKeyHeader = "X-Auth-Key";

struct AuthOutcome {
  std::optional<std::string> tenant;
  std::string reason;

  bool ok() const { return tenant.has_value(); }
};

// Maps a control-plane request to a tenant. Every rejection means HTTP 403.
class Authenticator {
 public:
  // `store` may be null only for mode none.
  Authenticator(AuthMode mode, std::shared_ptr<AccountStore> store);

  AuthMode mode() const { return mode_; }
  AuthOutcome authenticate(const http::Request& request) const;

  // Makes an outbound request acceptable to a peer running the same mode,
  // acting as `tenant`. Returns false when the tenant has no account.
  bool sign_outbound(http::Request& request, std::string_view tenant) const;

 private:
  AuthMode mode_;
  std::shared_ptr<AccountStore> store_;
};

}  // namespace snafu
