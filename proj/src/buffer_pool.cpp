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

#include "wormdb/buffer_pool.hpp"

#include <algorithm>
#include <vector>

namespace wormdb::engine {

BufferPool::BufferPool(spdu::SpduDfs& storage, std::size_t frames) : storage_(storage), capacity_(frames) {
  if (frames == 0) throw Error(ErrorCode::kInvalidArgument, "buffer pool needs at least one frame");
}

void BufferPool::touch(Frame& frame, PageId pageid) {
  lru_.erase(frame.lru);
  lru_.push_front(pageid);
  frame.lru = lru_.begin();
}

void BufferPool::evict_one() {
  const PageId victim = lru_.back();
  auto it = frames_.find(victim);
  if (it->second.dirty) {
    storage_.write_page(victim, it->second.payload);
    ++counters_.page_writes;
  }
  lru_.pop_back();
  frames_.erase(it);
}

BufferPool::Frame& BufferPool::admit(PageId pageid, Bytes payload) {
  while (frames_.size() >= capacity_) evict_one();
  lru_.push_front(pageid);
  Frame& frame = frames_[pageid];
  frame.payload = std::move(payload);
  frame.dirty = false;
  frame.lru = lru_.begin();
  return frame;
}

Bytes& BufferPool::get(PageId pageid) {
  if (auto it = frames_.find(pageid); it != frames_.end()) {
    ++counters_.hits;
    touch(it->second, pageid);
    return it->second.payload;
  }
  Bytes payload = storage_.read_page(pageid);
  ++counters_.page_reads;
  return admit(pageid, std::move(payload)).payload;
}

Bytes& BufferPool::fresh(PageId pageid) {
  if (auto it = frames_.find(pageid); it != frames_.end()) {
    touch(it->second, pageid);
    std::fill(it->second.payload.begin(), it->second.payload.end(), std::byte{0});
    it->second.dirty = true;
    return it->second.payload;
  }
  Frame& frame = admit(pageid, Bytes(storage_.payload_size()));
  frame.dirty = true;
  return frame.payload;
}

void BufferPool::mark_dirty(PageId pageid) {
  auto it = frames_.find(pageid);
  if (it == frames_.end()) throw Error(ErrorCode::kNotFound, "page " + std::to_string(pageid) + " is not cached");
  it->second.dirty = true;
}

void BufferPool::flush() {
  std::vector<PageId> dirty;
  for (const auto& [pageid, frame] : frames_) {
    if (frame.dirty) dirty.push_back(pageid);
  }
  std::sort(dirty.begin(), dirty.end());
  for (PageId pageid : dirty) {
    Frame& frame = frames_.at(pageid);
    storage_.write_page(pageid, frame.payload);
    ++counters_.page_writes;
    frame.dirty = false;
  }
}

void BufferPool::discard() {
  frames_.clear();
  lru_.clear();
}

std::size_t BufferPool::dirty_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(frames_.begin(), frames_.end(), [](const auto& entry) { return entry.second.dirty; }));
}

}  // namespace wormdb::engine
