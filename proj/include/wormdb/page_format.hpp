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

#include "wormdb/common.hpp"

namespace wormdb {

/// Every P-byte page carries a 16-byte header owned by the recovery layer:
///
///   [0, 8)   pageid      (u64 LE)
///   [8, 12)  sequence    (u32 LE)
///   [12, 16) checksum    (u32 LE, CRC-32 of bytes [0, 12) and the payload)
///
/// followed by P - 16 payload bytes handed to the layer above. A page whose
/// header is all zero has never been written and reads as zeroes.
struct PageHeader {
  PageId pageid = 0;
  std::uint32_t sequence = 0;
  std::uint32_t checksum = 0;
};

class PageFormat {
 public:
  static constexpr std::size_t kHeaderSize = 16;

  explicit PageFormat(std::size_t page_size);

  std::size_t page_size() const noexcept { return page_size_; }
  std::size_t payload_size() const noexcept { return page_size_ - kHeaderSize; }

  /// Builds a full page image for `payload` (which must be payload_size() bytes).
  Bytes make_page(PageId pageid, std::uint32_t sequence, ByteSpan payload) const;

  static PageHeader header(ByteSpan page);
  static ByteSpan payload(ByteSpan page) { return page.subspan(kHeaderSize); }

  /// True if the page is a never-written zero page or carries a valid header for `pageid`.
  bool valid_for(ByteSpan page, PageId pageid) const;

  /// Returns the payload of `page`, throwing CorruptData if its header does not check out.
  Bytes checked_payload(ByteSpan page, PageId pageid) const;

 private:
  static std::uint32_t checksum(ByteSpan page);

  std::size_t page_size_;
};

}  // namespace wormdb
