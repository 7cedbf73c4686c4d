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

#include "wormdb/spdu_dfs.hpp"

#include <algorithm>

#include <boost/crc.hpp>

namespace wormdb::spdu {
namespace {

std::uint64_t footer_checksum(ByteSpan page, std::size_t count) {
  boost::crc_optimal<64, 0x42F0E1EBA9EA3693ULL, 0, 0, false, false> crc;
  crc.process_bytes(page.data(), 5);
  crc.process_bytes(page.data() + 13, count * 8);
  return crc.checksum();
}

}  // namespace

//==============================================================================
// LogBlockFooter

Bytes LogBlockFooter::encode(std::size_t page_size) const {
  if (pageids.size() > capacity(page_size)) throw Error(ErrorCode::kInvalidArgument, "footer overflow");
  Bytes page(page_size);
  store_le<std::uint32_t>(page, 0, static_cast<std::uint32_t>(pageids.size()));
  page[4] = std::byte{commit_complete ? std::uint8_t{1} : std::uint8_t{0}};
  for (std::size_t i = 0; i < pageids.size(); ++i) store_le<std::uint64_t>(page, 13 + 8 * i, pageids[i]);
  store_le<std::uint64_t>(page, 5, footer_checksum(page, pageids.size()));
  return page;
}

LogBlockFooter LogBlockFooter::decode(ByteSpan page) {
  const std::uint32_t count = load_le<std::uint32_t>(page, 0);
  const std::uint8_t flag = std::to_integer<std::uint8_t>(page[4]);
  if (count > capacity(page.size()) || flag > 1 || load_le<std::uint64_t>(page, 5) != footer_checksum(page, count)) {
    throw Error(ErrorCode::kCorruptData, "log block footer failed verification");
  }
  LogBlockFooter footer;
  footer.commit_complete = flag == 1;
  footer.pageids.reserve(count);
  for (std::size_t i = 0; i < count; ++i) footer.pageids.push_back(load_le<std::uint64_t>(page, 13 + 8 * i));
  return footer;
}

//==============================================================================
// BlockUpdateBuffer

BlockUpdateBuffer::BlockUpdateBuffer(std::size_t page_size, std::uint64_t pages_per_block)
    : page_size_(page_size),
      pages_per_block_(pages_per_block),
      capacity_(static_cast<std::size_t>(pages_per_block - 1)),
      bytes_(page_size * pages_per_block) {}

std::optional<std::size_t> BlockUpdateBuffer::slot_of(PageId pageid) const {
  const auto it = slots_.find(pageid);
  if (it == slots_.end()) return std::nullopt;
  return it->second;
}

std::size_t BlockUpdateBuffer::put(PageId pageid, ByteSpan page) {
  std::size_t slot;
  if (const auto existing = slot_of(pageid)) {
    slot = *existing;
  } else {
    if (full()) throw Error(ErrorCode::kOutOfRange, "update buffer is full");
    slot = pageids_.size();
    pageids_.push_back(pageid);
    slots_.emplace(pageid, slot);
  }
  std::copy(page.begin(), page.end(), bytes_.begin() + static_cast<std::ptrdiff_t>(slot * page_size_));
  return slot;
}

ByteSpan BlockUpdateBuffer::page(std::size_t slot) const {
  return ByteSpan(bytes_).subspan(slot * page_size_, page_size_);
}

Bytes BlockUpdateBuffer::seal(bool commit_complete) const {
  Bytes block = bytes_;
  // Unused slots go out zeroed.
  std::fill(block.begin() + static_cast<std::ptrdiff_t>(pageids_.size() * page_size_), block.end(), std::byte{0});
  const Bytes footer = LogBlockFooter{pageids_, commit_complete}.encode(page_size_);
  std::copy(footer.begin(), footer.end(), block.begin() + static_cast<std::ptrdiff_t>(capacity_ * page_size_));
  return block;
}

void BlockUpdateBuffer::clear() {
  pageids_.clear();
  slots_.clear();
}

//==============================================================================
// MasterBlock

Bytes MasterBlock::encode(std::size_t page_size, std::uint64_t pages_per_block) const {
  Bytes block(page_size * pages_per_block);
  store_le<std::uint32_t>(block, 0, kMagic);
  block[4] = std::byte{commit_flag ? std::uint8_t{1} : std::uint8_t{0}};
  store_le<std::uint64_t>(block, 8, batch_block_count);
  store_le<std::uint32_t>(block, 16, crc32(ByteSpan(block).first(16)));
  return block;
}

MasterBlock MasterBlock::decode(ByteSpan page) {
  if (page.size() < 20 || load_le<std::uint32_t>(page, 0) != kMagic ||
      load_le<std::uint32_t>(page, 16) != crc32(page.first(16))) {
    throw Error(ErrorCode::kCorruptData, "bad master block");
  }
  return {page[4] != std::byte{0}, load_le<std::uint64_t>(page, 8)};
}

//==============================================================================
// SpduDfs

SpduDfs::SpduDfs(meta::MetaDfsManager& files, std::string data_file, std::string log_file, SpduDfsConfig config,
                 FaultInjector* faults)
    : files_(files),
      data_file_(std::move(data_file)),
      log_file_(std::move(log_file)),
      config_(config),
      faults_(faults),
      format_(files.page_config().page_size),
      pages_per_block_(files.page_config().pages_per_block),
      buffer_(files.page_config().page_size, files.page_config().pages_per_block) {
  if (pages_per_block_ < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two pages per block");
  if (pages_per_block_ - 1 > LogBlockFooter::capacity(format_.page_size())) {
    throw Error(ErrorCode::kInvalidArgument, "footer page cannot list N - 1 pageids");
  }
}

void SpduDfs::create(meta::MetaDfsManager& files, const std::string& data_file, const std::string& log_file,
                     std::uint64_t total_pages) {
  const meta::PageConfig& pages = files.page_config();
  files.create_meta(data_file);
  const Bytes zero_block(pages.block_size());
  const std::uint64_t blocks = (total_pages + pages.pages_per_block - 1) / pages.pages_per_block;
  for (std::uint64_t b = 0; b < blocks; ++b) files.append_block(data_file, zero_block);
  files.create_meta(log_file);
  files.append_block(log_file, MasterBlock{}.encode(pages.page_size, pages.pages_per_block));
}

std::uint64_t SpduDfs::page_count() const { return files_.block_count(data_file_) * pages_per_block_; }

void SpduDfs::write_page(PageId pageid, ByteSpan payload) {
  if (pageid >= page_count()) throw Error(ErrorCode::kOutOfRange, "page " + std::to_string(pageid));
  if (++sequence_ == 0) ++sequence_;
  const Bytes page = format_.make_page(pageid, sequence_, payload);
  buffer_.put(pageid, page);
  ++counters_.pages_written;
  if (buffer_.full()) flush_buffer(false);
}

Bytes SpduDfs::read_page(PageId pageid) {
  if (pageid >= page_count()) throw Error(ErrorCode::kOutOfRange, "page " + std::to_string(pageid));
  if (const auto slot = buffer_.slot_of(pageid)) {
    ++counters_.buffer_hits;
    return format_.checked_payload(buffer_.page(*slot), pageid);
  }
  if (const auto it = index_.find(pageid); it != index_.end()) {
    ++counters_.log_page_reads;
    const Bytes page = files_.read_page_at(log_file_, {it->second.block_id, it->second.b_offset});
    return format_.checked_payload(page, pageid);
  }
  ++counters_.data_page_reads;
  return format_.checked_payload(files_.read_page(data_file_, pageid), pageid);
}

std::optional<std::uint64_t> SpduDfs::flush_buffer(bool mark_commit) {
  if (buffer_.empty() && !mark_commit) return std::nullopt;
  const Bytes block = buffer_.seal(mark_commit);
  fault_point(faults_, mark_commit ? "before_commit_marker" : "buffer_flush.before_append");
  const std::uint64_t block_id = files_.append_block(log_file_, block);
  if (mark_commit) {
    committed_blocks_ = block_id;
    if (faults_ != nullptr) faults_->note_commit_durable();
  }
  ++counters_.blocks_flushed;
  fault_point(faults_, mark_commit ? "after_commit_marker" : "buffer_flush.after_append");
  const auto& ids = buffer_.pageids();
  for (std::size_t slot = 0; slot < ids.size(); ++slot) index_[ids[slot]] = {block_id, slot};
  buffer_.clear();
  return block_id;
}

void SpduDfs::commit_transaction() {
  flush_buffer(true);
  const std::uint64_t log_data_blocks = files_.block_count(log_file_) - 1;
  if (!config_.deferred || log_data_blocks > config_.post_commit_threshold_blocks) batch_post_commit();
}

void SpduDfs::write_master(const MasterBlock& master) {
  files_.overwrite_block(log_file_, 0, master.encode(format_.page_size(), pages_per_block_));
}

MasterBlock SpduDfs::read_master() { return MasterBlock::decode(files_.read_page_at(log_file_, {0, 0})); }

LogBlockFooter SpduDfs::read_footer(std::uint64_t block_id) {
  ++counters_.footer_reads;
  return LogBlockFooter::decode(files_.read_page_at(log_file_, {block_id, pages_per_block_ - 1}));
}

std::vector<LogBlockFooter> SpduDfs::read_footers() {
  const std::uint64_t count = files_.block_count(log_file_);
  std::vector<LogBlockFooter> footers;
  footers.reserve(count > 0 ? count - 1 : 0);
  for (std::uint64_t b = 1; b < count; ++b) footers.push_back(read_footer(b));
  return footers;
}

void SpduDfs::index_committed_prefix(const std::vector<LogBlockFooter>& footers, std::uint64_t last_committed) {
  index_.clear();
  for (std::uint64_t b = 1; b <= last_committed; ++b) {
    const auto& ids = footers[b - 1].pageids;
    for (std::size_t slot = 0; slot < ids.size(); ++slot) index_[ids[slot]] = {b, slot};
  }
  committed_blocks_ = last_committed;
}

const DfsLogTableIndex& SpduDfs::reconstruct_log_table_index() {
  files_.refresh(data_file_);
  files_.refresh(log_file_);
  const auto footers = read_footers();
  std::uint64_t last_committed = 0;
  for (std::uint64_t b = footers.size(); b >= 1; --b) {
    if (footers[b - 1].commit_complete) {
      last_committed = b;
      break;
    }
  }
  index_committed_prefix(footers, last_committed);
  return index_;
}

void SpduDfs::on_lock_acquired(bool write_lock) {
  buffer_.clear();
  reconstruct_log_table_index();
  const bool flagged = read_master().commit_flag;
  const bool dirty_tail = committed_blocks_ + 1 < files_.block_count(log_file_);
  if (!flagged && !dirty_tail) return;
  if (write_lock) {
    restart_system();
  } else if (flagged) {
    throw Error(ErrorCode::kRecoveryNeeded, "post-commit processing was interrupted; a writer must recover");
  }
}

bool SpduDfs::needs_recovery() {
  files_.refresh(log_file_);
  if (read_master().commit_flag) return true;
  const std::uint64_t count = files_.block_count(log_file_);
  return count > 1 && !read_footer(count - 1).commit_complete;
}

void SpduDfs::apply_committed_log() {
  const auto footers = read_footers();
  std::uint64_t last_committed = 0;
  for (std::uint64_t b = footers.size(); b >= 1; --b) {
    if (footers[b - 1].commit_complete) {
      last_committed = b;
      break;
    }
  }
  // Newest copy of each page wins.
  DfsLogTableIndex newest;
  for (std::uint64_t b = 1; b <= last_committed; ++b) {
    const auto& ids = footers[b - 1].pageids;
    for (std::size_t slot = 0; slot < ids.size(); ++slot) newest[ids[slot]] = {b, slot};
  }
  // `newest` is ordered by pageid, so consecutive runs share a data block.
  const std::size_t page_size = format_.page_size();
  auto it = newest.begin();
  while (it != newest.end()) {
    const std::uint64_t data_block = it->first / pages_per_block_;
    fault_point(faults_, "batch.before_block_remake");
    Bytes block = files_.read_block(data_file_, data_block);
    for (; it != newest.end() && it->first / pages_per_block_ == data_block; ++it) {
      const Bytes page = files_.read_page_at(log_file_, {it->second.block_id, it->second.b_offset});
      if (!format_.valid_for(page, it->first)) {
        throw Error(ErrorCode::kCorruptData, "log copy of page " + std::to_string(it->first) + " is damaged");
      }
      const std::uint64_t offset = (it->first % pages_per_block_) * page_size;
      std::copy(page.begin(), page.end(), block.begin() + static_cast<std::ptrdiff_t>(offset));
    }
    files_.overwrite_block(data_file_, data_block, block);
    fault_point(faults_, "batch.after_block_remake");
  }
}

void SpduDfs::batch_post_commit() {
  const std::uint64_t log_blocks = files_.block_count(log_file_);
  if (!buffer_.empty() || committed_blocks_ + 1 != log_blocks) {
    throw Error(ErrorCode::kInvalidArgument, "batch post-commit needs a fully committed log");
  }
  if (log_blocks <= 1) return;
  write_master({true, log_blocks});
  fault_point(faults_, "batch.after_flag_set");
  apply_committed_log();
  fault_point(faults_, "batch.before_log_truncate");
  files_.truncate_from(log_file_, 1);
  fault_point(faults_, "batch.after_log_truncate");
  write_master({false, 0});
  fault_point(faults_, "batch.after_flag_clear");
  index_.clear();
  committed_blocks_ = 0;
  ++counters_.batches;
}

std::uint64_t SpduDfs::newest_committed_block() {
  std::uint64_t b = files_.block_count(log_file_);
  while (b > 1) {
    --b;
    if (read_footer(b).commit_complete) return b;
  }
  return 0;
}

void SpduDfs::truncate_uncommitted_tail() {
  files_.truncate_from(log_file_, newest_committed_block() + 1);
}

void SpduDfs::abort_transaction() {
  buffer_.clear();
  fault_point(faults_, "abort.before_truncate");
  truncate_uncommitted_tail();
  reconstruct_log_table_index();
}

RecoveryPath SpduDfs::restart_system() {
  fault_point(faults_, "restart.begin");
  files_.recover();
  buffer_.clear();
  index_.clear();
  RecoveryPath path = RecoveryPath::kNone;
  const MasterBlock master = read_master();
  if (master.commit_flag) {
    // A shorter log than recorded means truncation had started, so every
    // data block was already remade.
    if (files_.block_count(log_file_) == master.batch_block_count) apply_committed_log();
    fault_point(faults_, "restart.after_redo");
    files_.truncate_from(log_file_, 1);
    write_master({false, 0});
    path = RecoveryPath::kRedo;
  } else {
    const std::uint64_t before = files_.block_count(log_file_);
    truncate_uncommitted_tail();
    if (files_.block_count(log_file_) != before) path = RecoveryPath::kRollback;
  }
  reconstruct_log_table_index();
  return path;
}

}  // namespace wormdb::spdu
