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

#include "wormdb/spdu_core.hpp"

#include <algorithm>

namespace wormdb::spdu {

std::string_view recovery_path_name(RecoveryPath path) noexcept {
  switch (path) {
    case RecoveryPath::kNone: return "none";
    case RecoveryPath::kRedo: return "redo";
    case RecoveryPath::kRollback: return "rollback";
  }
  return "unknown";
}

//==============================================================================
// MemPageFile

MemPageFile::MemPageFile(std::size_t page_size, std::uint64_t initial_pages)
    : page_size_(page_size), durable_(initial_pages, Bytes(page_size)), working_(durable_) {}

Bytes MemPageFile::read(std::uint64_t index) const {
  if (index >= working_.size()) throw Error(ErrorCode::kOutOfRange, "page " + std::to_string(index));
  ++reads_;
  return working_[index];
}

void MemPageFile::write(std::uint64_t index, ByteSpan page) {
  if (page.size() != page_size_) throw Error(ErrorCode::kInvalidArgument, "wrong page size");
  if (index > working_.size()) throw Error(ErrorCode::kOutOfRange, "write past end at " + std::to_string(index));
  if (index == working_.size()) {
    working_.emplace_back(page.begin(), page.end());
  } else {
    working_[index].assign(page.begin(), page.end());
  }
  dirty_.insert(index);
  ++writes_;
}

void MemPageFile::truncate(std::uint64_t pages) {
  if (pages < working_.size()) working_.resize(pages);
}

void MemPageFile::sync() {
  durable_.resize(working_.size());
  for (std::uint64_t index : dirty_) {
    if (index < working_.size()) durable_[index] = working_[index];
  }
  dirty_.clear();
  ++syncs_;
}

void MemPageFile::crash() {
  for (std::uint64_t index : dirty_) {
    if (index < working_.size() && index < durable_.size()) working_[index] = durable_[index];
  }
  working_.resize(durable_.size());
  for (std::uint64_t i = 0; i < durable_.size(); ++i) {
    if (working_[i].size() != page_size_) working_[i] = durable_[i];
  }
  dirty_.clear();
}

//==============================================================================
// MasterPage
//
//   [0, 4)   magic
//   [4]      commit_flag
//   [8, 16)  log_page_count
//   [16, 20) CRC-32 of [0, 16)

Bytes MasterPage::encode(std::size_t page_size) const {
  Bytes page(page_size);
  store_le<std::uint32_t>(page, 0, kMagic);
  page[4] = std::byte{commit_flag ? std::uint8_t{1} : std::uint8_t{0}};
  store_le<std::uint64_t>(page, 8, log_page_count);
  store_le<std::uint32_t>(page, 16, crc32(ByteSpan(page).first(16)));
  return page;
}

MasterPage MasterPage::decode(ByteSpan page) {
  if (page.size() < 20 || load_le<std::uint32_t>(page, 0) != kMagic ||
      load_le<std::uint32_t>(page, 16) != crc32(page.first(16))) {
    throw Error(ErrorCode::kCorruptData, "bad master page");
  }
  return {page[4] != std::byte{0}, load_le<std::uint64_t>(page, 8)};
}

//==============================================================================
// SpduCore

SpduCore::SpduCore(PageFile& data, PageFile& log, FaultInjector* faults)
    : data_(data), log_(log), faults_(faults), format_(data.page_size()) {
  if (log_.page_size() != data_.page_size()) throw Error(ErrorCode::kInvalidArgument, "page size mismatch");
  if (log_.size() == 0) {
    write_master({});
  }
}

MasterPage SpduCore::master() const { return MasterPage::decode(log_.read(0)); }

void SpduCore::write_master(const MasterPage& master) {
  log_.write(0, master.encode(format_.page_size()));
  log_.sync();
}

void SpduCore::check_pageid(PageId pageid) const {
  if (pageid >= data_.size()) throw Error(ErrorCode::kOutOfRange, "page " + std::to_string(pageid));
}

void SpduCore::write_page(PageId pageid, ByteSpan payload) {
  check_pageid(pageid);
  Bytes page = format_.make_page(pageid, ++sequence_ == 0 ? ++sequence_ : sequence_, payload);
  // Step 1: is the page already in the log?
  const auto it = index_.find(pageid);
  if (it != index_.end()) {
    // Step 2a: overwrite the existing log copy.
    log_.write(it->second + 1, page);
  } else {
    // Step 2b: allocate a new log page and index it.
    const std::uint64_t offset = index_.size();
    log_.write(offset + 1, page);
    index_.emplace(pageid, offset);
  }
  frames_[pageid] = {Bytes(payload.begin(), payload.end()), true, true};
  fault_point(faults_, "core.write.after_log_write");
}

Bytes SpduCore::read_page(PageId pageid) {
  check_pageid(pageid);
  if (const auto frame = frames_.find(pageid); frame != frames_.end() && frame->second.valid) {
    return frame->second.payload;
  }
  if (const auto it = index_.find(pageid); it != index_.end()) {
    return format_.checked_payload(log_.read(it->second + 1), pageid);
  }
  return format_.checked_payload(data_.read(pageid), pageid);
}

void SpduCore::commit_transaction() {
  // Step 1: every dirty page reaches the log file on disk.
  log_.sync();
  for (auto& [pageid, frame] : frames_) frame.dirty = false;
  fault_point(faults_, "core.commit.after_log_sync");

  // Step 2: the commit point.
  write_master({true, index_.size()});
  if (faults_ != nullptr) faults_->note_commit_durable();
  fault_point(faults_, "core.commit.after_flag_set");

  // Step 3.
  post_commit();

  // Step 4.
  write_master({false, 0});
  fault_point(faults_, "core.commit.after_flag_clear");

  // Step 5.
  initialize_log();
  fault_point(faults_, "core.commit.after_log_reset");
}

void SpduCore::post_commit() {
  for (const auto& [pageid, offset] : index_) {
    Bytes page = log_.read(offset + 1);
    if (!format_.valid_for(page, pageid)) {
      throw Error(ErrorCode::kCorruptData, "log page " + std::to_string(offset) + " does not hold page " +
                                               std::to_string(pageid));
    }
    data_.write(pageid, page);
    fault_point(faults_, "core.post_commit.after_page_copy");
  }
  data_.sync();
  fault_point(faults_, "core.post_commit.after_data_sync");
}

void SpduCore::abort_transaction() {
  for (auto it = frames_.begin(); it != frames_.end();) {
    if (it->second.dirty) {
      it->second.valid = false;
      it = frames_.erase(it);
    } else {
      ++it;
    }
  }
  initialize_log();
}

void SpduCore::initialize_log() {
  log_.truncate(1);
  log_.sync();
  index_.clear();
  frames_.clear();
}

void SpduCore::rebuild_index(std::uint64_t log_pages) {
  index_.clear();
  if (log_pages + 1 > log_.size()) {
    throw Error(ErrorCode::kCorruptData, "master page claims " + std::to_string(log_pages) + " log pages, file has " +
                                             std::to_string(log_.size() - 1));
  }
  for (std::uint64_t offset = 0; offset < log_pages; ++offset) {
    const Bytes page = log_.read(offset + 1);
    const PageHeader header = PageFormat::header(page);
    if (!format_.valid_for(page, header.pageid) || all_zero(ByteSpan(page).first(PageFormat::kHeaderSize))) {
      throw Error(ErrorCode::kCorruptData, "log page " + std::to_string(offset) + " failed verification");
    }
    index_[header.pageid] = offset;
  }
}

RecoveryPath SpduCore::restart_system() {
  frames_.clear();
  const MasterPage m = master();
  RecoveryPath path = log_.size() > 1 ? RecoveryPath::kRollback : RecoveryPath::kNone;
  if (m.commit_flag) {
    // Step 1: the crash hit post-commit processing; run it again from the start.
    rebuild_index(m.log_page_count);
    post_commit();
    fault_point(faults_, "core.restart.after_redo");
    write_master({false, 0});
    path = RecoveryPath::kRedo;
  }
  // Step 2.
  initialize_log();
  return path;
}

}  // namespace wormdb::spdu
