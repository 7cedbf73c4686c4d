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
#include <vector>

#include "wormdb/common.hpp"

namespace wormdb::engine {

struct IndexSegment {
  PageId start = 0;
  std::uint64_t page_count = 0;
  std::uint64_t entry_count = 0;

  PageId end() const noexcept { return start + page_count; }
  bool operator==(const IndexSegment&) const = default;
};

/// Table layout, stored in the payload of page 0.
///
///   [0, 4)    magic "WCAT"
///   [4, 8)    version
///   [8, 64)   total_pages, heap_start, heap_capacity, heap_used_pages,
///             record_count, index_start, index_capacity (u64 LE each)
///   [64, 68)  segment count
///   [68, ...) segments: start, page_count, entry_count (u64 LE each)
///
/// Heap pages occupy [1, index_start); the index extent is the last eighth of
/// the address space (at least 4 pages).
struct Catalog {
  static constexpr std::uint32_t kMagic = 0x54414357;  // "WCAT"
  static constexpr std::uint32_t kVersion = 1;
  static constexpr std::size_t kMaxSegments = 8;
  static constexpr std::size_t kEncodedSize = 68 + kMaxSegments * 24;

  std::uint64_t total_pages = 0;
  PageId heap_start = 1;
  std::uint64_t heap_capacity = 0;
  std::uint64_t heap_used_pages = 0;
  std::uint64_t record_count = 0;
  PageId index_start = 0;
  std::uint64_t index_capacity = 0;
  std::vector<IndexSegment> segments;

  bool operator==(const Catalog&) const = default;

  static Catalog initial(std::uint64_t total_pages);

  Bytes encode(std::size_t payload_size) const;
  /// Nothing for an all-zero (never written) page; CorruptData for anything
  /// else that is not a catalog.
  static std::optional<Catalog> decode(ByteSpan payload);
};

}  // namespace wormdb::engine
