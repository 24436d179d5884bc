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

#include "snafu/auth/accounts.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include <spdlog/spdlog.h>

#include "snafu/auth/crypto.hpp"
#include "snafu/common/error.hpp"

namespace snafu {

namespace {

constexpr auto kRecheckInterval = std::chrono::seconds(1);

std::string required_string(const nlohmann::json& entry, const char* key) {
  const auto it = entry.find(key);
  if (it == entry.end() || !it->is_string() || it->get<std::string>().empty()) {
    throw ConfigError(std::string("account entry lacks a non-empty \"") + key + "\"");
  }
  return it->get<std::string>();
}

}  // namespace

AccountList::AccountList(std::vector<Account> accounts) : accounts_(std::move(accounts)) {
  std::set<std::string_view> seen;
  for (const auto& a : accounts_) {
    if (a.access_key_id.empty() || a.secret_access_key.empty() || a.tenant.empty()) {
      throw ConfigError("account with empty field");
    }
    if (!seen.insert(a.access_key_id).second) {
      throw ConfigError("duplicate access key id " + a.access_key_id);
    }
  }
}

AccountList AccountList::from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ConfigError("accounts file must hold a JSON array");
  std::vector<Account> out;
  for (const auto& entry : j) {
    if (!entry.is_object()) throw ConfigError("account entry must be an object");
    out.push_back({required_string(entry, "access_key_id"),
                   required_string(entry, "secret_access_key"), required_string(entry, "tenant")});
  }
  return AccountList(std::move(out));
}

AccountList AccountList::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read accounts file " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("accounts file " + path.string() + ": " + e.what());
  }
}

const Account* AccountList::find_by_key(std::string_view access_key_id) const {
  for (const auto& a : accounts_) {
    if (a.access_key_id == access_key_id) return &a;
  }
  return nullptr;
}

const Account* AccountList::find_by_secret(std::string_view secret) const {
  const Account* match = nullptr;
  for (const auto& a : accounts_) {
    if (crypto::constant_time_equals(a.secret_access_key, secret) && match == nullptr) match = &a;
  }
  return match;
}

const Account* AccountList::find_by_tenant(std::string_view tenant) const {
  for (const auto& a : accounts_) {
    if (a.tenant == tenant) return &a;
  }
  return nullptr;
}

std::filesystem::path default_accounts_file() {
  if (const char* env = std::getenv("SNAFU_ACCOUNTS_FILE"); env != nullptr && *env != '\0') {
    return env;
  }
  return "accounts.json";
}

AccountStore::AccountStore(std::filesystem::path path) : path_(std::move(path)) {
  loaded_mtime_ = std::filesystem::last_write_time(path_);
  list_ = std::make_shared<const AccountList>(AccountList::load(path_));
  next_check_ = std::chrono::steady_clock::now() + kRecheckInterval;
}

AccountStore::AccountStore(AccountList fixed)
    : list_(std::make_shared<const AccountList>(std::move(fixed))) {}

std::shared_ptr<const AccountList> AccountStore::current() {
  std::lock_guard lock(mutex_);
  if (path_.empty()) return list_;
  const auto now = std::chrono::steady_clock::now();
  if (now < next_check_) return list_;
  next_check_ = now + kRecheckInterval;

  std::error_code ec;
  const auto mtime = std::filesystem::last_write_time(path_, ec);
  if (ec || mtime == loaded_mtime_) return list_;
  try {
    list_ = std::make_shared<const AccountList>(AccountList::load(path_));
    loaded_mtime_ = mtime;
    spdlog::info("reloaded {} accounts from {}", list_->size(), path_.string());
  } catch (const ConfigError& e) {
    spdlog::warn("keeping previous accounts: {}", e.what());
    loaded_mtime_ = mtime;
  }
  return list_;
}

}  // namespace snafu
