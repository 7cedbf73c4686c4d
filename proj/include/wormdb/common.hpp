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

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wormdb {

using Bytes = std::vector<std::byte>;
using ByteSpan = std::span<const std::byte>;
using MutableByteSpan = std::span<std::byte>;

/// Logical page number in a database address space.
using PageId = std::uint64_t;

enum class ErrorCode {
  kAlreadyExists,
  kNotFound,
  kOutOfRange,
  kInsufficientReplicaNodes,
  kAllReplicasDead,
  kUnknownNode,
  kWrongBlockSize,
  kCorruptData,
  kUnknownLock,
  kNotGranted,
  kUpgradeConflict,
  kServiceShutdown,
  kRecordTooLarge,
  kDatabaseFull,
  kValueTooLong,
  kInvalidArgument,
  kNoLockHeld,
  kRecoveryNeeded,
  kIoError,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Little-endian fixed-width codecs used by every on-storage format.

template <typename T>
inline void store_le(MutableByteSpan out, std::size_t offset, T value) {
  static_assert(std::is_unsigned_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out[offset + i] = static_cast<std::byte>((value >> (8 * i)) & 0xFF);
  }
}

template <typename T>
inline T load_le(ByteSpan in, std::size_t offset) {
  static_assert(std::is_unsigned_v<T>);
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(std::to_integer<std::uint8_t>(in[offset + i])) << (8 * i);
  }
  return value;
}

inline Bytes to_bytes(std::string_view s) {
  Bytes out(s.size());
  std::memcpy(out.data(), s.data(), s.size());
  return out;
}

inline bool all_zero(ByteSpan data) {
  for (std::byte b : data) {
    if (b != std::byte{0}) return false;
  }
  return true;
}

std::uint32_t crc32(ByteSpan data);
std::uint64_t crc64(ByteSpan data);

}  // namespace wormdb
