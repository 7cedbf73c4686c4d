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

#include "wormdb/slotted_page.hpp"

#include <algorithm>

namespace wormdb::engine {

SlottedPage::SlottedPage(MutableByteSpan payload) : page_(payload) {
  if (page_.size() > 0xFFFF) throw Error(ErrorCode::kInvalidArgument, "page payload too large for u16 offsets");
}

std::uint16_t SlottedPage::slot_count() const { return load_le<std::uint16_t>(page_, 0); }

std::size_t SlottedPage::free_end() const {
  const std::uint16_t stored = load_le<std::uint16_t>(page_, 2);
  return stored == 0 ? page_.size() : stored;
}

std::size_t SlottedPage::free_space() const {
  const std::size_t directory_end = kHeaderSize + kSlotSize * slot_count();
  return free_end() - directory_end;
}

std::optional<std::uint16_t> SlottedPage::insert(ByteSpan record, std::size_t capacity) {
  capacity = std::max(capacity, record.size());
  if (capacity + kSlotSize > free_space()) return std::nullopt;
  const std::uint16_t slot = slot_count();
  const std::size_t offset = free_end() - capacity;
  std::copy(record.begin(), record.end(), page_.begin() + static_cast<std::ptrdiff_t>(offset));
  const std::size_t entry = kHeaderSize + kSlotSize * slot;
  store_le<std::uint16_t>(page_, entry, static_cast<std::uint16_t>(offset));
  store_le<std::uint16_t>(page_, entry + 2, static_cast<std::uint16_t>(record.size()));
  store_le<std::uint16_t>(page_, entry + 4, static_cast<std::uint16_t>(capacity));
  store_le<std::uint16_t>(page_, 0, static_cast<std::uint16_t>(slot + 1));
  store_le<std::uint16_t>(page_, 2, static_cast<std::uint16_t>(offset));
  return slot;
}

ByteSpan SlottedPage::get(std::uint16_t slot) const {
  if (slot >= slot_count()) throw Error(ErrorCode::kOutOfRange, "slot " + std::to_string(slot));
  const std::size_t entry = kHeaderSize + kSlotSize * slot;
  const std::size_t offset = load_le<std::uint16_t>(page_, entry);
  const std::size_t length = load_le<std::uint16_t>(page_, entry + 2);
  if (offset + length > page_.size()) throw Error(ErrorCode::kCorruptData, "slot points past the page");
  return ByteSpan(page_).subspan(offset, length);
}

void SlottedPage::update(std::uint16_t slot, ByteSpan record) {
  if (slot >= slot_count()) throw Error(ErrorCode::kOutOfRange, "slot " + std::to_string(slot));
  const std::size_t entry = kHeaderSize + kSlotSize * slot;
  const std::size_t offset = load_le<std::uint16_t>(page_, entry);
  const std::size_t capacity = load_le<std::uint16_t>(page_, entry + 4);
  if (record.size() > capacity) {
    throw Error(ErrorCode::kRecordTooLarge, "record grew to " + std::to_string(record.size()) + " bytes, slot holds " +
                                                std::to_string(capacity));
  }
  std::copy(record.begin(), record.end(), page_.begin() + static_cast<std::ptrdiff_t>(offset));
  store_le<std::uint16_t>(page_, entry + 2, static_cast<std::uint16_t>(record.size()));
}

}  // namespace wormdb::engine
