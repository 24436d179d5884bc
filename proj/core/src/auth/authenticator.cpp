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

#include "snafu/auth/authenticator.hpp"

#include "snafu/auth/sigv4.hpp"
#include "snafu/common/error.hpp"
#include "snafu/registry/function_unit.hpp"

namespace snafu {

std::string_view to_string(AuthMode mode) {
  switch (mode) {
    case AuthMode::none: return "none";
    case AuthMode::accounts: return "accounts";
    case AuthMode::aws4: return "aws4";
  }
  return "none";
}

std::optional<AuthMode> parse_auth_mode(std::string_view text) {
  if (text == "none") return AuthMode::none;
  if (text == "accounts") return AuthMode::accounts;
  if (text == "aws4") return AuthMode::aws4;
  return std::nullopt;
}

Authenticator::Authenticator(AuthMode mode, std::shared_ptr<AccountStore> store)
    : mode_(mode), store_(std::move(store)) {
  if (mode_ != AuthMode::none && !store_) {
    throw ConfigError("authenticator " + std::string(to_string(mode_)) + " needs an accounts list");
  }
}

AuthOutcome Authenticator::authenticate(const http::Request& request) const {
  switch (mode_) {
    case AuthMode::none:
      return {std::string(kDefaultTenant), {}};
    case AuthMode::accounts: {
      const auto key = request.headers.get(kAuthKeyHeader);
      if (!key) return {std::nullopt, "missing X-Auth-Key header"};
      const auto list = store_->current();
      if (const Account* a = list->find_by_secret(*key)) return {a->tenant, {}};
      return {std::nullopt, "unknown key"};
    }
    case AuthMode::aws4: {
      const auto list = store_->current();
      auto v = sigv4::verify_request(request, *list);
      return {std::move(v.tenant), std::move(v.reason)};
    }
  }
  return {std::nullopt, "unsupported mode"};
}

bool Authenticator::sign_outbound(http::Request& request, std::string_view tenant) const {
  if (mode_ == AuthMode::none) return true;
  const auto list = store_->current();
  const Account* account = list->find_by_tenant(tenant);
  if (account == nullptr) return false;
  if (mode_ == AuthMode::accounts) {
    request.headers.set(kAuthKeyHeader, account->secret_access_key);
    return true;
  }
  sigv4::SigningParams params;
  params.access_key_id = account->access_key_id;
  params.secret_access_key = account->secret_access_key;
  sigv4::sign_request(request, params);
  return true;
}

}  // namespace snafu
