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
#include <set>
#include <vector>

#include "wormdb/common.hpp"
#include "wormdb/fault.hpp"
#include "wormdb/page_format.hpp"

namespace wormdb::spdu {

/// Abstract flat array of fixed-size pages with an explicit durability barrier.
class PageFile {
 public:
  virtual ~PageFile() = default;

  virtual std::size_t page_size() const = 0;
  virtual std::uint64_t size() const = 0;
  virtual Bytes read(std::uint64_t index) const = 0;
  /// Writes page `index`; `index == size()` appends.
  virtual void write(std::uint64_t index, ByteSpan page) = 0;
  virtual void truncate(std::uint64_t pages) = 0;
  virtual void sync() = 0;
};

/// In-memory page file that keeps a durable image and a working image.
/// crash() throws away everything written since the last sync().
class MemPageFile final : public PageFile {
 public:
  explicit MemPageFile(std::size_t page_size, std::uint64_t initial_pages = 0);

  std::size_t page_size() const override { return page_size_; }
  std::uint64_t size() const override { return working_.size(); }
  Bytes read(std::uint64_t index) const override;
  void write(std::uint64_t index, ByteSpan page) override;
  void truncate(std::uint64_t pages) override;
  void sync() override;

  void crash();

  std::uint64_t durable_size() const noexcept { return durable_.size(); }
  const Bytes& durable_page(std::uint64_t index) const { return durable_.at(index); }

  std::uint64_t reads() const noexcept { return reads_; }
  std::uint64_t writes() const noexcept { return writes_; }
  std::uint64_t syncs() const noexcept { return syncs_; }

 private:
  std::size_t page_size_;
  std::vector<Bytes> durable_;
  std::vector<Bytes> working_;
  std::set<std::uint64_t> dirty_;
  mutable std::uint64_t reads_ = 0;
  std::uint64_t writes_ = 0;
  std::uint64_t syncs_ = 0;
};

/// pageid -> ordinal of the page's copy in the log file.
using LogTableIndex = std::map<PageId, std::uint64_t>;

/// First page of the log file.
struct MasterPage {
  static constexpr std::uint32_t kMagic = 0x55445053;  // "SPDU"

  bool commit_flag = false;
  std::uint64_t log_page_count = 0;

  Bytes encode(std::size_t page_size) const;
  static MasterPage decode(ByteSpan page);
};

struct BufferFrame {
  Bytes payload;
  bool dirty = false;
  bool valid = false;
};

enum class RecoveryPath { kNone, kRedo, kRollback };

std::string_view recovery_path_name(RecoveryPath path) noexcept;

/// Shadow-page deferred-update recovery over a data file and a log file.
///
/// Updated pages go to the log file; the log table index redirects reads to
/// them. Commit makes the log durable, sets the commit flag in the master page
/// (the commit point), copies every logged page back to its home location in
/// the data file, clears the flag and empties the log. Restart re-runs the copy
/// whenever the flag is found set.
///
/// Log pages carry the standard page header so restart can rebuild the index
/// from the durable log alone.
class SpduCore {
 public:
  /// `data` must already hold the whole database address space. An empty
  /// `log` is initialised with a master page.
  SpduCore(PageFile& data, PageFile& log, FaultInjector* faults = nullptr);

  std::size_t payload_size() const noexcept { return format_.payload_size(); }
  std::uint64_t page_count() const { return data_.size(); }

  void write_page(PageId pageid, ByteSpan payload);
  Bytes read_page(PageId pageid);

  void commit_transaction();
  /// Copies every indexed log page to its data-file location. Idempotent.
  void post_commit();
  void abort_transaction();
  RecoveryPath restart_system();

  const LogTableIndex& log_table_index() const noexcept { return index_; }
  const std::map<PageId, BufferFrame>& frames() const noexcept { return frames_; }
  MasterPage master() const;

 private:
  void write_master(const MasterPage& master);
  void initialize_log();
  void rebuild_index(std::uint64_t log_pages);
  void check_pageid(PageId pageid) const;

  PageFile& data_;
  PageFile& log_;
  FaultInjector* faults_;
  PageFormat format_;
  LogTableIndex index_;
  std::map<PageId, BufferFrame> frames_;
  std::uint32_t sequence_ = 0;
};

}  // namespace wormdb::spdu
