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

#include "wormdb/common.hpp"

#include <boost/crc.hpp>

namespace wormdb {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kAlreadyExists: return "AlreadyExists";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kInsufficientReplicaNodes: return "InsufficientReplicaNodes";
    case ErrorCode::kAllReplicasDead: return "AllReplicasDead";
    case ErrorCode::kUnknownNode: return "UnknownNode";
    case ErrorCode::kWrongBlockSize: return "WrongBlockSize";
    case ErrorCode::kCorruptData: return "CorruptData";
    case ErrorCode::kUnknownLock: return "UnknownLock";
    case ErrorCode::kNotGranted: return "NotGranted";
    case ErrorCode::kUpgradeConflict: return "UpgradeConflict";
    case ErrorCode::kServiceShutdown: return "ServiceShutdown";
    case ErrorCode::kRecordTooLarge: return "RecordTooLarge";
    case ErrorCode::kDatabaseFull: return "DatabaseFull";
    case ErrorCode::kValueTooLong: return "ValueTooLong";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNoLockHeld: return "NoLockHeld";
    case ErrorCode::kRecoveryNeeded: return "RecoveryNeeded";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

std::uint32_t crc32(ByteSpan data) {
  boost::crc_32_type crc;
  crc.process_bytes(data.data(), data.size());
  return crc.checksum();
}

// CRC-64/ECMA-182.
std::uint64_t crc64(ByteSpan data) {
  boost::crc_optimal<64, 0x42F0E1EBA9EA3693ULL, 0, 0, false, false> crc;
  crc.process_bytes(data.data(), data.size());
  return crc.checksum();
}

}  // namespace wormdb
