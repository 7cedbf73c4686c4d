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

#include "wormdb/records.hpp"

#include <bit>
#include <chrono>
#include <cstdio>

namespace wormdb::engine {
namespace {

void check_len(const std::string& value, std::size_t limit, const char* field) {
  if (value.size() > limit) {
    throw Error(ErrorCode::kValueTooLong,
                std::string(field) + " is " + std::to_string(value.size()) + " bytes, limit " + std::to_string(limit));
  }
}

void put_string(Bytes& out, const std::string& value) {
  out.push_back(static_cast<std::byte>(value.size()));
  for (char c : value) out.push_back(static_cast<std::byte>(c));
}

void put_u32(Bytes& out, std::uint32_t value) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((value >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(ByteSpan in) : in_(in) {}

  std::string string() {
    const std::size_t len = std::to_integer<std::size_t>(take(1)[0]);
    const ByteSpan body = take(len);
    return std::string(reinterpret_cast<const char*>(body.data()), body.size());
  }

  std::uint32_t u32() { return load_le<std::uint32_t>(take(4), 0); }

  bool done() const { return pos_ == in_.size(); }

 private:
  ByteSpan take(std::size_t n) {
    if (pos_ + n > in_.size()) throw Error(ErrorCode::kCorruptData, "truncated record");
    const ByteSpan out = in_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  ByteSpan in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string format_date(Date date) {
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{date}}};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

Date parse_date(std::string_view text) {
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  if (std::sscanf(std::string(text).c_str(), "%d-%u-%u", &y, &m, &d) != 3) {
    throw Error(ErrorCode::kInvalidArgument, "bad date '" + std::string(text) + "'");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) throw Error(ErrorCode::kInvalidArgument, "bad date '" + std::string(text) + "'");
  return static_cast<Date>(std::chrono::sys_days{ymd}.time_since_epoch().count());
}

void UserVisitsRecord::validate() const {
  check_len(source_ip, kMaxSourceIp, "sourceIP");
  check_len(dest_url, kMaxDestUrl, "destURL");
  check_len(user_agent, kMaxUserAgent, "userAgent");
  check_len(country_code, kMaxCountryCode, "countryCode");
  check_len(language_code, kMaxLanguageCode, "languageCode");
  check_len(search_word, kMaxSearchWord, "searchWord");
}

Bytes UserVisitsRecord::serialize() const {
  validate();
  Bytes out;
  out.reserve(64 + source_ip.size() + dest_url.size() + user_agent.size() + search_word.size());
  put_string(out, source_ip);
  put_string(out, dest_url);
  put_u32(out, static_cast<std::uint32_t>(visit_date));
  put_u32(out, std::bit_cast<std::uint32_t>(ad_revenue));
  put_string(out, user_agent);
  put_string(out, country_code);
  put_string(out, language_code);
  put_string(out, search_word);
  put_u32(out, static_cast<std::uint32_t>(duration));
  return out;
}

UserVisitsRecord UserVisitsRecord::deserialize(ByteSpan bytes) {
  Reader in(bytes);
  UserVisitsRecord r;
  r.source_ip = in.string();
  r.dest_url = in.string();
  r.visit_date = static_cast<Date>(in.u32());
  r.ad_revenue = std::bit_cast<float>(in.u32());
  r.user_agent = in.string();
  r.country_code = in.string();
  r.language_code = in.string();
  r.search_word = in.string();
  r.duration = static_cast<std::int32_t>(in.u32());
  if (!in.done()) throw Error(ErrorCode::kCorruptData, "trailing bytes after record");
  return r;
}

std::size_t UserVisitsRecord::reserved_size() const {
  return serialize().size() + (kMaxCountryCode - std::min(country_code.size(), kMaxCountryCode));
}

}  // namespace wormdb::engine
