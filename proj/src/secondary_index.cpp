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

#include "wormdb/secondary_index.hpp"

#include <algorithm>

namespace wormdb::engine {

void IndexPageCodec::encode(std::span<const IndexEntry> entries, MutableByteSpan payload) {
  if (entries.size() > entries_per_page(payload.size())) {
    throw Error(ErrorCode::kInvalidArgument, "too many entries for one index page");
  }
  std::fill(payload.begin(), payload.end(), std::byte{0});
  store_le<std::uint32_t>(payload, 0, static_cast<std::uint32_t>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const IndexEntry& e = entries[i];
    if (e.key.size() > kMaxKey) throw Error(ErrorCode::kValueTooLong, "index key longer than 16 bytes");
    if (e.rid.pageid > 0xFFFFFFFFu) throw Error(ErrorCode::kOutOfRange, "rid page does not fit 32 bits");
    const std::size_t at = 4 + kEntrySize * i;
    payload[at] = static_cast<std::byte>(e.key.size());
    std::memcpy(payload.data() + at + 1, e.key.data(), e.key.size());
    store_le<std::uint32_t>(payload, at + 17, static_cast<std::uint32_t>(e.rid.pageid));
    store_le<std::uint16_t>(payload, at + 21, e.rid.slot);
  }
}

std::vector<IndexEntry> IndexPageCodec::decode(ByteSpan payload) {
  const std::uint32_t count = load_le<std::uint32_t>(payload, 0);
  if (count > entries_per_page(payload.size())) throw Error(ErrorCode::kCorruptData, "index page count out of range");
  std::vector<IndexEntry> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t at = 4 + kEntrySize * i;
    const auto len = std::to_integer<std::size_t>(payload[at]);
    if (len > kMaxKey) throw Error(ErrorCode::kCorruptData, "index key length out of range");
    out[i].key.assign(reinterpret_cast<const char*>(payload.data() + at + 1), len);
    out[i].rid = {load_le<std::uint32_t>(payload, at + 17), load_le<std::uint16_t>(payload, at + 21)};
  }
  return out;
}

SecondaryIndex::SecondaryIndex(BufferPool& pool, Catalog& catalog, std::size_t payload_size)
    : pool_(pool), catalog_(catalog), per_page_(IndexPageCodec::entries_per_page(payload_size)) {}

std::vector<IndexEntry> SecondaryIndex::read_page(PageId pageid) { return IndexPageCodec::decode(pool_.get(pageid)); }

std::uint64_t SecondaryIndex::pages_for(std::uint64_t entries) const { return (entries + per_page_ - 1) / per_page_; }

void SecondaryIndex::lookup_segment(const IndexSegment& segment, std::string_view key, std::vector<Rid>& out) {
  // First page whose last key is >= key; every match starts there.
  std::uint64_t lo = 0;
  std::uint64_t hi = segment.page_count;
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    const auto entries = read_page(segment.start + mid);
    if (!entries.empty() && entries.back().key < key) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  for (std::uint64_t p = lo; p < segment.page_count; ++p) {
    const auto entries = read_page(segment.start + p);
    auto first = std::lower_bound(entries.begin(), entries.end(), key,
                                  [](const IndexEntry& e, std::string_view k) { return e.key < k; });
    for (auto it = first; it != entries.end(); ++it) {
      if (it->key != key) return;
      out.push_back(it->rid);
    }
  }
}

std::vector<Rid> SecondaryIndex::lookup(std::string_view key) {
  std::vector<Rid> out;
  for (const IndexSegment& segment : catalog_.segments) lookup_segment(segment, key, out);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<IndexEntry> SecondaryIndex::all_entries() {
  std::vector<IndexEntry> out;
  for (const IndexSegment& segment : catalog_.segments) {
    for (PageId p = segment.start; p < segment.end(); ++p) {
      auto entries = read_page(p);
      out.insert(out.end(), entries.begin(), entries.end());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void SecondaryIndex::write_segment(PageId start, const std::vector<IndexEntry>& entries) {
  for (std::uint64_t p = 0; p < pages_for(entries.size()); ++p) {
    const std::size_t first = p * per_page_;
    const std::size_t count = std::min(per_page_, entries.size() - first);
    IndexPageCodec::encode(std::span(entries).subspan(first, count), pool_.fresh(start + p));
  }
}

void SecondaryIndex::add_segment(std::vector<IndexEntry> entries) {
  if (entries.empty()) return;
  std::sort(entries.begin(), entries.end());
  const PageId next = catalog_.segments.empty() ? catalog_.index_start : catalog_.segments.back().end();
  const PageId extent_end = catalog_.index_start + catalog_.index_capacity;
  if (catalog_.segments.size() < Catalog::kMaxSegments && next + pages_for(entries.size()) <= extent_end) {
    write_segment(next, entries);
    catalog_.segments.push_back({next, pages_for(entries.size()), entries.size()});
    return;
  }
  std::vector<IndexEntry> merged = all_entries();
  std::vector<IndexEntry> combined;
  combined.reserve(merged.size() + entries.size());
  std::merge(merged.begin(), merged.end(), entries.begin(), entries.end(), std::back_inserter(combined));
  if (pages_for(combined.size()) > catalog_.index_capacity) {
    throw Error(ErrorCode::kDatabaseFull, "index needs " + std::to_string(pages_for(combined.size())) +
                                              " pages, extent holds " + std::to_string(catalog_.index_capacity));
  }
  write_segment(catalog_.index_start, combined);
  catalog_.segments = {{catalog_.index_start, pages_for(combined.size()), combined.size()}};
}

}  // namespace wormdb::engine
