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

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "snafu/common/time.hpp"

namespace snafu {

struct Account {
  std::string access_key_id;
  std::string secret_access_key;
  std::string tenant;

  friend bool operator==(const Account&, const Account&) = default;
};

// Immutable set of accounts with unique access key ids.
class AccountList {
 public:
  AccountList() = default;
  // Throws ConfigError on duplicate key ids or empty fields.
  explicit AccountList(std::vector<Account> accounts);

  // JSON array of {"access_key_id","secret_access_key","tenant"}.
  static AccountList from_json(const nlohmann::json& j);
  static AccountList load(const std::filesystem::path& path);

  const Account* find_by_key(std::string_view access_key_id) const;
  // Constant-time per candidate; visits every account.
  const Account* find_by_secret(std::string_view secret) const;
  // First account of the tenant, used to sign outbound calls on its behalf.
  const Account* find_by_tenant(std::string_view tenant) const;

  const std::vector<Account>& accounts() const { return accounts_; }
  std::size_t size() const { return accounts_.size(); }

 private:
  std::vector<Account> accounts_;
};

// `$SNAFU_ACCOUNTS_FILE`, else "./accounts.json".
std::filesystem::path default_accounts_file();

// Accounts file that is reloaded when its modification time changes. A
// reload that fails keeps the previous list and logs a warning.
class AccountStore {
 public:
  explicit AccountStore(std::filesystem::path path);
  // In-memory store without a backing file.
  explicit AccountStore(AccountList fixed);

  std::shared_ptr<const AccountList> current();
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::mutex mutex_;
  std::shared_ptr<const AccountList> list_;
  std::filesystem::file_time_type loaded_mtime_{};
  SteadyTime next_check_{};
};

}  // namespace snafu
