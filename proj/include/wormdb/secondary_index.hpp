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
#include <string>
#include <string_view>
#include <vector>

#include "wormdb/buffer_pool.hpp"
#include "wormdb/catalog.hpp"
#include "wormdb/records.hpp"

namespace wormdb::engine {

struct IndexEntry {
  std::string key;
  Rid rid;

  auto operator<=>(const IndexEntry&) const = default;
};

/// Index page payload: u32 entry count, then 24-byte entries
/// {key_len u8, key[16], pageid u32, slot u16, pad u8}.
struct IndexPageCodec {
  static constexpr std::size_t kEntrySize = 24;
  static constexpr std::size_t kMaxKey = 16;

  static std::size_t entries_per_page(std::size_t payload_size) noexcept { return (payload_size - 4) / kEntrySize; }
  static void encode(std::span<const IndexEntry> entries, MutableByteSpan payload);
  static std::vector<IndexEntry> decode(ByteSpan payload);
};

/// sourceIP index made of sorted immutable segments inside the catalog's index
/// extent. Each commit appends one segment; once the segment list is full or
/// the extent has no room left, all segments are merged into one.
class SecondaryIndex {
 public:
  SecondaryIndex(BufferPool& pool, Catalog& catalog, std::size_t payload_size);

  /// Binary search in every segment. Result is sorted by rid.
  std::vector<Rid> lookup(std::string_view key);
  std::vector<IndexEntry> all_entries();

  /// Writes `entries` as a new segment (or merges), updating the catalog.
  /// Throws DatabaseFull when the merged index does not fit the extent.
  void add_segment(std::vector<IndexEntry> entries);

 private:
  std::vector<IndexEntry> read_page(PageId pageid);
  void lookup_segment(const IndexSegment& segment, std::string_view key, std::vector<Rid>& out);
  std::uint64_t pages_for(std::uint64_t entries) const;
  void write_segment(PageId start, const std::vector<IndexEntry>& entries);

  BufferPool& pool_;
  Catalog& catalog_;
  std::size_t per_page_;
};

}  // namespace wormdb::engine
