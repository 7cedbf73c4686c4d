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

#include "wormdb/catalog.hpp"

#include <algorithm>

namespace wormdb::engine {

Catalog Catalog::initial(std::uint64_t total_pages) {
  Catalog c;
  c.total_pages = total_pages;
  c.index_capacity = std::max<std::uint64_t>(4, total_pages / 8);
  if (total_pages < c.index_capacity + 2) {
    throw Error(ErrorCode::kInvalidArgument, "database needs at least " + std::to_string(c.index_capacity + 2) +
                                                 " pages, got " + std::to_string(total_pages));
  }
  c.index_start = total_pages - c.index_capacity;
  c.heap_capacity = c.index_start - c.heap_start;
  return c;
}

Bytes Catalog::encode(std::size_t payload_size) const {
  if (payload_size < kEncodedSize) throw Error(ErrorCode::kInvalidArgument, "page too small for the catalog");
  if (segments.size() > kMaxSegments) throw Error(ErrorCode::kInvalidArgument, "too many index segments");
  Bytes out(payload_size);
  store_le<std::uint32_t>(out, 0, kMagic);
  store_le<std::uint32_t>(out, 4, kVersion);
  const std::uint64_t fields[] = {total_pages,  heap_start,  heap_capacity, heap_used_pages,
                                  record_count, index_start, index_capacity};
  for (std::size_t i = 0; i < 7; ++i) store_le<std::uint64_t>(out, 8 + 8 * i, fields[i]);
  store_le<std::uint32_t>(out, 64, static_cast<std::uint32_t>(segments.size()));
  for (std::size_t i = 0; i < segments.size(); ++i) {
    store_le<std::uint64_t>(out, 68 + 24 * i, segments[i].start);
    store_le<std::uint64_t>(out, 76 + 24 * i, segments[i].page_count);
    store_le<std::uint64_t>(out, 84 + 24 * i, segments[i].entry_count);
  }
  return out;
}

std::optional<Catalog> Catalog::decode(ByteSpan payload) {
  if (all_zero(payload)) return std::nullopt;
  if (payload.size() < kEncodedSize || load_le<std::uint32_t>(payload, 0) != kMagic ||
      load_le<std::uint32_t>(payload, 4) != kVersion) {
    throw Error(ErrorCode::kCorruptData, "page 0 does not hold a catalog");
  }
  Catalog c;
  std::uint64_t* fields[] = {&c.total_pages,  &c.heap_start,  &c.heap_capacity, &c.heap_used_pages,
                             &c.record_count, &c.index_start, &c.index_capacity};
  for (std::size_t i = 0; i < 7; ++i) *fields[i] = load_le<std::uint64_t>(payload, 8 + 8 * i);
  const std::uint32_t count = load_le<std::uint32_t>(payload, 64);
  if (count > kMaxSegments) throw Error(ErrorCode::kCorruptData, "catalog segment count out of range");
  for (std::uint32_t i = 0; i < count; ++i) {
    c.segments.push_back({load_le<std::uint64_t>(payload, 68 + 24 * i), load_le<std::uint64_t>(payload, 76 + 24 * i),
                          load_le<std::uint64_t>(payload, 84 + 24 * i)});
  }
  if (c.heap_start + c.heap_capacity > c.index_start || c.index_start + c.index_capacity > c.total_pages ||
      c.heap_used_pages > c.heap_capacity) {
    throw Error(ErrorCode::kCorruptData, "catalog extents are inconsistent");
  }
  return c;
}

}  // namespace wormdb::engine
