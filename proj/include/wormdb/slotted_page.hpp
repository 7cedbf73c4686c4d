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

#include <cstdint>
#include <optional>

#include "wormdb/common.hpp"

namespace wormdb::engine {

/// Slotted record page laid over a page payload.
///
///   [0, 2)      slot_count
///   [2, 4)      free_end: start of the record area (0 on a fresh page = payload end)
///   [4, ...)    slot directory, 6 bytes per slot: offset, length, capacity (u16 LE)
///   [free_end, payload end)  record bytes, growing downward
///
/// Each record owns `capacity` bytes so it can be rewritten in place while it
/// does not outgrow its reservation.
class SlottedPage {
 public:
  static constexpr std::size_t kHeaderSize = 4;
  static constexpr std::size_t kSlotSize = 6;

  explicit SlottedPage(MutableByteSpan payload);

  std::uint16_t slot_count() const;
  std::size_t free_space() const;

  /// Returns the new slot, or nothing if the page lacks room.
  std::optional<std::uint16_t> insert(ByteSpan record, std::size_t capacity);
  ByteSpan get(std::uint16_t slot) const;
  /// Rewrites a record in place; throws RecordTooLarge if it exceeds the slot capacity.
  void update(std::uint16_t slot, ByteSpan record);

  /// Largest record an empty page accepts.
  static std::size_t max_record(std::size_t payload_size) { return payload_size - kHeaderSize - kSlotSize; }

 private:
  std::size_t free_end() const;

  MutableByteSpan page_;
};

}  // namespace wormdb::engine
