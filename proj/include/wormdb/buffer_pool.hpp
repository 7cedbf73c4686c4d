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
#include <list>
#include <unordered_map>

#include "wormdb/common.hpp"
#include "wormdb/spdu_dfs.hpp"

namespace wormdb::engine {

struct PoolCounters {
  std::uint64_t page_reads = 0;   // misses served by storage
  std::uint64_t page_writes = 0;  // pages handed to storage write_page
  std::uint64_t hits = 0;
};

/// LRU cache of page payloads in front of one session's SpduDfs.
///
/// References returned by get()/fresh() stay valid until the next call that
/// can evict (get, fresh).
class BufferPool {
 public:
  static constexpr std::size_t kDefaultFrames = 1024;

  explicit BufferPool(spdu::SpduDfs& storage, std::size_t frames = kDefaultFrames);

  Bytes& get(PageId pageid);
  /// Zeroed, dirty frame for a page whose stored content is known to be unused.
  Bytes& fresh(PageId pageid);
  void mark_dirty(PageId pageid);

  /// Writes every dirty frame to storage in ascending pageid order.
  void flush();
  /// Drops all frames, dirty ones included.
  void discard();

  std::size_t size() const noexcept { return frames_.size(); }
  std::size_t dirty_count() const noexcept;
  const PoolCounters& counters() const noexcept { return counters_; }
  void reset_counters() noexcept { counters_ = {}; }

 private:
  struct Frame {
    Bytes payload;
    bool dirty = false;
    std::list<PageId>::iterator lru;
  };

  Frame& admit(PageId pageid, Bytes payload);
  void touch(Frame& frame, PageId pageid);
  void evict_one();

  spdu::SpduDfs& storage_;
  std::size_t capacity_;
  std::unordered_map<PageId, Frame> frames_;
  std::list<PageId> lru_;  // front = most recently used
  PoolCounters counters_;
};

}  // namespace wormdb::engine
