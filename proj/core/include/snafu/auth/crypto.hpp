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

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace snafu::crypto {

using Digest = std::array<unsigned char, 32>;

Digest sha256(std::string_view data);
Digest hmac_sha256(std::string_view key, std::string_view data);

inline std::string_view as_bytes(const Digest& d) {
  return {reinterpret_cast<const char*>(d.data()), d.size()};
}

// Lowercase hex of raw bytes.
std::string hex(std::string_view bytes);
inline std::string hex(const Digest& d) { return hex(as_bytes(d)); }

inline std::string sha256_hex(std::string_view data) { return hex(sha256(data)); }

// Comparison whose running time depends only on the lengths.
bool constant_time_equals(std::string_view a, std::string_view b);

std::string base64_encode(std::string_view bytes);
// Nullopt on characters outside the standard alphabet or bad padding.
std::optional<std::string> base64_decode(std::string_view text);

}  // namespace snafu::crypto
