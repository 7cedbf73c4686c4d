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

#include "wormdb/page_format.hpp"

#include <algorithm>

#include <boost/crc.hpp>

namespace wormdb {

PageFormat::PageFormat(std::size_t page_size) : page_size_(page_size) {
  if (page_size_ <= kHeaderSize) throw Error(ErrorCode::kInvalidArgument, "page size too small");
}

std::uint32_t PageFormat::checksum(ByteSpan page) {
  boost::crc_32_type crc;
  crc.process_bytes(page.data(), 12);
  crc.process_bytes(page.data() + kHeaderSize, page.size() - kHeaderSize);
  return crc.checksum();
}

Bytes PageFormat::make_page(PageId pageid, std::uint32_t sequence, ByteSpan payload) const {
  if (payload.size() != payload_size()) {
    throw Error(ErrorCode::kInvalidArgument, "payload is " + std::to_string(payload.size()) + " bytes, expected " +
                                                 std::to_string(payload_size()));
  }
  Bytes page(page_size_);
  store_le<std::uint64_t>(page, 0, pageid);
  store_le<std::uint32_t>(page, 8, sequence);
  std::copy(payload.begin(), payload.end(), page.begin() + kHeaderSize);
  store_le<std::uint32_t>(page, 12, checksum(page));
  return page;
}

PageHeader PageFormat::header(ByteSpan page) {
  return {load_le<std::uint64_t>(page, 0), load_le<std::uint32_t>(page, 8), load_le<std::uint32_t>(page, 12)};
}

bool PageFormat::valid_for(ByteSpan page, PageId pageid) const {
  if (page.size() != page_size_) return false;
  if (all_zero(page.first(kHeaderSize))) return all_zero(page);
  const PageHeader h = header(page);
  return h.pageid == pageid && h.checksum == checksum(page);
}

Bytes PageFormat::checked_payload(ByteSpan page, PageId pageid) const {
  if (!valid_for(page, pageid)) {
    throw Error(ErrorCode::kCorruptData, "page " + std::to_string(pageid) + " failed header verification");
  }
  const ByteSpan body = payload(page);
  return Bytes(body.begin(), body.end());
}

}  // namespace wormdb
