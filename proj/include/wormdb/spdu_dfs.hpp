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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wormdb/common.hpp"
#include "wormdb/fault.hpp"
#include "wormdb/meta_dfs.hpp"
#include "wormdb/page_format.hpp"
#include "wormdb/spdu_core.hpp"

namespace wormdb::spdu {

/// Trailer stored in the last page of every log data block.
///
///   [0, 4)        page_count      (u32 LE)
///   [4]           commit_complete (0 or 1)
///   [5, 13)       checksum        (u64 LE, CRC-64/ECMA of [0, 5) and the pageid list)
///   [13, 13+8n)   pageids         (u64 LE each, in slot order)
struct LogBlockFooter {
  std::vector<PageId> pageids;
  bool commit_complete = false;

  std::size_t page_count() const noexcept { return pageids.size(); }

  Bytes encode(std::size_t page_size) const;
  /// Throws CorruptData on a checksum mismatch or an impossible page count.
  static LogBlockFooter decode(ByteSpan page);

  static std::size_t capacity(std::size_t page_size) noexcept { return (page_size - 13) / 8; }
};

struct LogSlot {
  std::uint64_t block_id = 0;
  std::uint64_t b_offset = 0;

  bool operator==(const LogSlot&) const = default;
};

/// pageid -> newest durable log copy.
using DfsLogTableIndex = std::map<PageId, LogSlot>;

/// One DFS block worth of staged page images. The last page slot is reserved
/// for the footer, so at most N - 1 pages fit.
class BlockUpdateBuffer {
 public:
  BlockUpdateBuffer(std::size_t page_size, std::uint64_t pages_per_block);

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return pageids_.size(); }
  bool empty() const noexcept { return pageids_.empty(); }
  bool full() const noexcept { return pageids_.size() == capacity_; }

  std::optional<std::size_t> slot_of(PageId pageid) const;
  /// Overwrites the page's slot if buffered, else appends. Returns the slot.
  std::size_t put(PageId pageid, ByteSpan page);
  ByteSpan page(std::size_t slot) const;
  const std::vector<PageId>& pageids() const noexcept { return pageids_; }

  /// Full block image with the footer in its last page.
  Bytes seal(bool commit_complete) const;
  void clear();

 private:
  std::size_t page_size_;
  std::uint64_t pages_per_block_;
  std::size_t capacity_;
  Bytes bytes_;
  std::vector<PageId> pageids_;
  std::map<PageId, std::size_t> slots_;
};

/// First page of log block 0.
///
///   [0, 4)   magic
///   [4]      commit_flag
///   [8, 16)  batch_block_count: log block count when the flag was set
///   [16, 20) CRC-32 of [0, 16)
struct MasterBlock {
  static constexpr std::uint32_t kMagic = 0x46445053;  // "SPDF"

  bool commit_flag = false;
  std::uint64_t batch_block_count = 0;

  Bytes encode(std::size_t page_size, std::uint64_t pages_per_block) const;
  static MasterBlock decode(ByteSpan page);
};

struct SpduDfsConfig {
  // Batch post-commit runs once the log holds more than this many data blocks.
  std::uint64_t post_commit_threshold_blocks = 64;
  // When false, every commit is followed by a batch post-commit.
  bool deferred = true;
};

struct SpduDfsCounters {
  std::uint64_t footer_reads = 0;
  std::uint64_t buffer_hits = 0;
  std::uint64_t log_page_reads = 0;
  std::uint64_t data_page_reads = 0;
  std::uint64_t pages_written = 0;
  std::uint64_t blocks_flushed = 0;
  std::uint64_t batches = 0;
};

/// Shadow-page deferred-update recovery with a data meta file and a log meta
/// file on the write-once DFS.
///
/// Updated pages collect in a one-block update buffer that is appended to the
/// log meta file when full or at commit. Commit appends a block whose footer
/// has commit_complete set; that append is the commit point. Copying the log
/// back into the data meta file is deferred and batched, one remake per
/// touched data block, guarded by the commit flag in the master block.
///
/// One instance per session: the log table index and the update buffer are
/// private. All mutating calls require the database write lock.
class SpduDfs {
 public:
  SpduDfs(meta::MetaDfsManager& files, std::string data_file, std::string log_file, SpduDfsConfig config = {},
          FaultInjector* faults = nullptr);

  /// Creates the data meta file with `total_pages` zero pages (rounded up to
  /// whole blocks) and a log meta file holding only the master block.
  static void create(meta::MetaDfsManager& files, const std::string& data_file, const std::string& log_file,
                     std::uint64_t total_pages);

  std::size_t payload_size() const noexcept { return format_.payload_size(); }
  std::uint64_t page_count() const;
  const std::string& data_file() const noexcept { return data_file_; }
  const std::string& log_file() const noexcept { return log_file_; }

  void write_page(PageId pageid, ByteSpan payload);
  Bytes read_page(PageId pageid);

  /// Appends the buffer as a log block. With `mark_commit` an empty buffer
  /// still produces a footer-only marker block. Returns the new block id, or
  /// nothing when there was nothing to write.
  std::optional<std::uint64_t> flush_buffer(bool mark_commit);

  void commit_transaction();
  void batch_post_commit();
  /// Copies the newest committed version of every logged page into the data
  /// meta file, one remake per touched data block. Idempotent.
  void apply_committed_log();
  void abort_transaction();
  RecoveryPath restart_system();

  /// Rebuilds the index from block footers only. Called at every lock
  /// acquisition. Blocks past the newest commit_complete block belong to a
  /// transaction that never committed and are ignored.
  const DfsLogTableIndex& reconstruct_log_table_index();

  /// Called right after the session obtained its database lock.
  void on_lock_acquired(bool write_lock);

  bool needs_recovery();
  MasterBlock read_master();
  std::vector<LogBlockFooter> read_footers();

  const DfsLogTableIndex& log_table_index() const noexcept { return index_; }
  const BlockUpdateBuffer& buffer() const noexcept { return buffer_; }
  std::uint64_t committed_blocks() const noexcept { return committed_blocks_; }
  const SpduDfsCounters& counters() const noexcept { return counters_; }
  void reset_counters() noexcept { counters_ = {}; }

 private:
  void write_master(const MasterBlock& master);
  LogBlockFooter read_footer(std::uint64_t block_id);
  std::uint64_t newest_committed_block();
  void truncate_uncommitted_tail();
  void index_committed_prefix(const std::vector<LogBlockFooter>& footers, std::uint64_t last_committed);

  meta::MetaDfsManager& files_;
  std::string data_file_;
  std::string log_file_;
  SpduDfsConfig config_;
  FaultInjector* faults_;
  PageFormat format_;
  std::uint64_t pages_per_block_;
  BlockUpdateBuffer buffer_;
  DfsLogTableIndex index_;
  std::uint64_t committed_blocks_ = 0;
  std::uint32_t sequence_ = 0;
  SpduDfsCounters counters_;
};

}  // namespace wormdb::spdu
