// Copyright 2026 The wormdb Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <compare>
#include <cstdint>
#include <string>

#include "wormdb/common.hpp"

namespace wormdb::engine {

/// Record id: heap page plus slot number.
struct Rid {
  PageId pageid = 0;
  std::uint16_t slot = 0;

  auto operator<=>(const Rid&) const = default;
};

/// Days since 1970-01-01.
using Date = std::int32_t;

std::string format_date(Date date);
Date parse_date(std::string_view text);

/// One row of the UserVisits table.
struct UserVisitsRecord {
  static constexpr std::size_t kMaxSourceIp = 16;
  static constexpr std::size_t kMaxDestUrl = 100;
  static constexpr std::size_t kMaxUserAgent = 64;
  static constexpr std::size_t kMaxCountryCode = 3;
  static constexpr std::size_t kMaxLanguageCode = 6;
  static constexpr std::size_t kMaxSearchWord = 32;

  std::string source_ip;
  std::string dest_url;
  Date visit_date = 0;
  float ad_revenue = 0;
  std::string user_agent;
  std::string country_code;
  std::string language_code;
  std::string search_word;
  std::int32_t duration = 0;

  bool operator==(const UserVisitsRecord&) const = default;

  /// Throws ValueTooLong if any field exceeds its column width.
  void validate() const;

  /// Fixed field order, u8 length prefix on strings, little-endian numbers.
  Bytes serialize() const;
  static UserVisitsRecord deserialize(ByteSpan bytes);

  /// Bytes to reserve so the row can later be rewritten with a full-width country code.
  std::size_t reserved_size() const;
};

}  // namespace wormdb::engine
