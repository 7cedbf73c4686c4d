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
#include <mutex>
#include <string>
#include <vector>

#include "wormdb/common.hpp"
#include "wormdb/dfs.hpp"
#include "wormdb/fault.hpp"

namespace wormdb::meta {

/// Static mapping between DBMS pages and DFS blocks.
struct PageConfig {
  std::uint64_t page_size = 4096;
  std::uint64_t pages_per_block = 16;

  std::uint64_t block_size() const noexcept { return page_size * pages_per_block; }

  /// Throws InvalidArgument unless `block_size` is a whole multiple of `page_size`.
  static PageConfig for_block(std::uint64_t block_size, std::uint64_t page_size);
};

struct PageAddress {
  std::uint64_t block_id = 0;
  std::uint64_t page_offset = 0;

  bool operator==(const PageAddress&) const = default;
};

inline PageAddress page_address(PageId pageid, std::uint64_t pages_per_block) noexcept {
  return {pageid / pages_per_block, pageid % pages_per_block};
}

struct MetaDfsFile {
  std::string name;
  std::uint64_t block_count = 0;
};

/// One row of the Meta DFS File Table: mirrors the NameNode metadata of a
/// constituent DFS file.
struct MetaDfsFileTableEntry {
  std::string dfs_file_name;
  std::uint64_t file_size = 0;
  std::uint64_t num_blocks = 0;
  std::uint32_t num_replicas = 0;
  std::vector<std::vector<dfs::NodeId>> block_positions;
};

struct MetaCounters {
  std::uint64_t remakes = 0;
  std::uint64_t appends = 0;
  std::uint64_t block_reads = 0;
  std::uint64_t page_reads = 0;
  std::uint64_t block_deletes = 0;
};

/// Presents overwritable, appendable, page-addressable files on top of the
/// write-once DFS. A meta file `name` is the ordered set of one-block DFS files
/// `name/00000000`, `name/00000001`, ...
///
/// Overwrites are DFS file remakes. The new content is first staged under
/// `<constituent>.remake` so a crash between the delete and the re-create can
/// be completed from the staged copy (see recover()).
///
/// Mutations of one meta file need external mutual exclusion (the database
/// write lock); reads may run concurrently.
class MetaDfsManager {
 public:
  MetaDfsManager(dfs::Dfs& dfs, PageConfig pages, FaultInjector* faults = nullptr);

  const PageConfig& page_config() const noexcept { return pages_; }
  dfs::Dfs& dfs() noexcept { return dfs_; }

  MetaDfsFile create_meta(const std::string& name);
  void delete_meta(const std::string& name);
  bool exists(const std::string& name) const;
  MetaDfsFile open(const std::string& name);

  std::uint64_t append_block(const std::string& name, ByteSpan content);
  void overwrite_block(const std::string& name, std::uint64_t block_id, ByteSpan content);
  Bytes read_block(const std::string& name, std::uint64_t block_id);
  Bytes read_page(const std::string& name, PageId pageid);
  Bytes read_page_at(const std::string& name, PageAddress address);
  void truncate_from(const std::string& name, std::uint64_t block_id);

  std::uint64_t block_count(const std::string& name) const;

  /// Re-derives the block count from the NameNode (other processes may have
  /// appended since this manager last looked).
  std::uint64_t refresh(const std::string& name);

  /// Completes or discards interrupted remakes and re-derives block counts.
  /// Returns the number of constituents restored from a staged copy.
  std::uint64_t recover();

  std::vector<MetaDfsFileTableEntry> table(const std::string& name) const;

  MetaCounters counters(const std::string& name) const;
  void reset_counters();

  static std::string constituent_name(const std::string& name, std::uint64_t block_id);
  static std::string staging_name(const std::string& name, std::uint64_t block_id);

 private:
  std::uint64_t derive_block_count(const std::string& name) const;
  std::uint64_t count_or_throw(const std::string& name) const;
  void check_block(ByteSpan content) const;

  dfs::Dfs& dfs_;
  PageConfig pages_;
  FaultInjector* faults_;
  mutable std::mutex mutex_;
  std::map<std::string, std::uint64_t> block_counts_;
  std::map<std::string, MetaCounters> counters_;
};

}  // namespace wormdb::meta
