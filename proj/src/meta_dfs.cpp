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

#include "wormdb/meta_dfs.hpp"

#include <cstdio>

namespace wormdb::meta {
namespace {

constexpr std::string_view kStagingSuffix = ".remake";

// Parses the 8-digit ordinal of a constituent file name under `prefix`.
std::optional<std::uint64_t> parse_ordinal(const std::string& file, const std::string& prefix) {
  if (!file.starts_with(prefix)) return std::nullopt;
  const std::string_view tail = std::string_view(file).substr(prefix.size());
  if (tail.size() != 8) return std::nullopt;
  std::uint64_t value = 0;
  for (char c : tail) {
    if (c < '0' || c > '9') return std::nullopt;
    value = value * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return value;
}

}  // namespace

PageConfig PageConfig::for_block(std::uint64_t block_size, std::uint64_t page_size) {
  if (page_size == 0 || block_size == 0 || block_size % page_size != 0) {
    throw Error(ErrorCode::kInvalidArgument, "block size " + std::to_string(block_size) +
                                                 " is not a multiple of page size " + std::to_string(page_size));
  }
  return {page_size, block_size / page_size};
}

MetaDfsManager::MetaDfsManager(dfs::Dfs& dfs, PageConfig pages, FaultInjector* faults)
    : dfs_(dfs), pages_(pages), faults_(faults) {
  if (pages_.block_size() != dfs_.config().block_size_bytes) {
    throw Error(ErrorCode::kInvalidArgument, "page config does not tile the DFS block size");
  }
  recover();
}

std::string MetaDfsManager::constituent_name(const std::string& name, std::uint64_t block_id) {
  char suffix[32];
  std::snprintf(suffix, sizeof(suffix), "%08llu", static_cast<unsigned long long>(block_id));
  return name + "/" + suffix;
}

std::string MetaDfsManager::staging_name(const std::string& name, std::uint64_t block_id) {
  return constituent_name(name, block_id) + std::string(kStagingSuffix);
}

std::uint64_t MetaDfsManager::derive_block_count(const std::string& name) const {
  const std::string prefix = name + "/";
  std::uint64_t count = 0;
  for (const auto& entry : dfs_.list(prefix)) {
    const auto ordinal = parse_ordinal(entry.name, prefix);
    if (!ordinal) continue;
    if (*ordinal != count) {
      throw Error(ErrorCode::kCorruptData, "meta file " + name + " is missing block " + std::to_string(count));
    }
    ++count;
  }
  return count;
}

std::uint64_t MetaDfsManager::recover() {
  std::uint64_t restored = 0;
  std::lock_guard lock(mutex_);
  block_counts_.clear();
  for (const std::string& name : dfs_.meta_names()) {
    const std::string prefix = name + "/";
    for (const auto& entry : dfs_.list(prefix)) {
      if (!entry.name.ends_with(kStagingSuffix)) continue;
      const std::string target = entry.name.substr(0, entry.name.size() - kStagingSuffix.size());
      if (!dfs_.exists(target)) {
        Bytes staged = dfs_.read_range(entry.name, 0, entry.size_bytes);
        dfs_.create_file(target, staged);
        ++restored;
      }
      dfs_.delete_file(entry.name);
    }
    block_counts_[name] = derive_block_count(name);
  }
  return restored;
}

void MetaDfsManager::check_block(ByteSpan content) const {
  if (content.size() != pages_.block_size()) {
    throw Error(ErrorCode::kWrongBlockSize,
                std::to_string(content.size()) + " bytes, block is " + std::to_string(pages_.block_size()));
  }
}

std::uint64_t MetaDfsManager::count_or_throw(const std::string& name) const {
  const auto it = block_counts_.find(name);
  if (it == block_counts_.end()) throw Error(ErrorCode::kNotFound, "meta file " + name);
  return it->second;
}

MetaDfsFile MetaDfsManager::create_meta(const std::string& name) {
  std::lock_guard lock(mutex_);
  if (block_counts_.contains(name)) throw Error(ErrorCode::kAlreadyExists, "meta file " + name);
  dfs_.register_meta(name);
  block_counts_[name] = 0;
  return {name, 0};
}

void MetaDfsManager::delete_meta(const std::string& name) {
  std::lock_guard lock(mutex_);
  const std::uint64_t count = count_or_throw(name);
  for (std::uint64_t b = count; b-- > 0;) dfs_.delete_file(constituent_name(name, b));
  for (const auto& entry : dfs_.list(name + "/")) dfs_.delete_file(entry.name);
  dfs_.unregister_meta(name);
  block_counts_.erase(name);
  counters_.erase(name);
}

bool MetaDfsManager::exists(const std::string& name) const {
  std::lock_guard lock(mutex_);
  return block_counts_.contains(name);
}

MetaDfsFile MetaDfsManager::open(const std::string& name) { return {name, refresh(name)}; }

std::uint64_t MetaDfsManager::append_block(const std::string& name, ByteSpan content) {
  check_block(content);
  std::lock_guard lock(mutex_);
  const std::uint64_t block_id = count_or_throw(name);
  dfs_.create_file(constituent_name(name, block_id), content);
  block_counts_[name] = block_id + 1;
  ++counters_[name].appends;
  return block_id;
}

void MetaDfsManager::overwrite_block(const std::string& name, std::uint64_t block_id, ByteSpan content) {
  check_block(content);
  std::lock_guard lock(mutex_);
  if (block_id >= count_or_throw(name)) {
    throw Error(ErrorCode::kOutOfRange, name + " block " + std::to_string(block_id));
  }
  const std::string target = constituent_name(name, block_id);
  const std::string staging = staging_name(name, block_id);
  if (dfs_.exists(staging)) dfs_.delete_file(staging);
  dfs_.create_file(staging, content);
  fault_point(faults_, "meta.remake.after_stage");
  dfs_.delete_file(target);
  fault_point(faults_, "meta.remake.after_delete");
  dfs_.create_file(target, content);
  ++counters_[name].remakes;
  fault_point(faults_, "meta.remake.after_create");
  dfs_.delete_file(staging);
}

Bytes MetaDfsManager::read_block(const std::string& name, std::uint64_t block_id) {
  std::string target;
  {
    std::lock_guard lock(mutex_);
    if (block_id >= count_or_throw(name)) {
      throw Error(ErrorCode::kOutOfRange, name + " block " + std::to_string(block_id));
    }
    ++counters_[name].block_reads;
    target = constituent_name(name, block_id);
  }
  return dfs_.read_range(target, 0, pages_.block_size());
}

Bytes MetaDfsManager::read_page(const std::string& name, PageId pageid) {
  return read_page_at(name, page_address(pageid, pages_.pages_per_block));
}

Bytes MetaDfsManager::read_page_at(const std::string& name, PageAddress address) {
  if (address.page_offset >= pages_.pages_per_block) {
    throw Error(ErrorCode::kOutOfRange, "page offset " + std::to_string(address.page_offset));
  }
  std::string target;
  {
    std::lock_guard lock(mutex_);
    if (address.block_id >= count_or_throw(name)) {
      throw Error(ErrorCode::kOutOfRange, name + " block " + std::to_string(address.block_id));
    }
    ++counters_[name].page_reads;
    target = constituent_name(name, address.block_id);
  }
  return dfs_.read_range(target, address.page_offset * pages_.page_size, pages_.page_size);
}

void MetaDfsManager::truncate_from(const std::string& name, std::uint64_t block_id) {
  std::lock_guard lock(mutex_);
  const std::uint64_t count = count_or_throw(name);
  if (block_id > count) throw Error(ErrorCode::kOutOfRange, name + " truncate at " + std::to_string(block_id));
  for (std::uint64_t b = count; b > block_id; --b) {
    dfs_.delete_file(constituent_name(name, b - 1));
    block_counts_[name] = b - 1;
    ++counters_[name].block_deletes;
    fault_point(faults_, "meta.truncate.after_delete");
  }
}

std::uint64_t MetaDfsManager::block_count(const std::string& name) const {
  std::lock_guard lock(mutex_);
  return count_or_throw(name);
}

std::uint64_t MetaDfsManager::refresh(const std::string& name) {
  std::lock_guard lock(mutex_);
  if (!dfs_.meta_registered(name)) throw Error(ErrorCode::kNotFound, "meta file " + name);
  const std::uint64_t count = derive_block_count(name);
  block_counts_[name] = count;
  return count;
}

std::vector<MetaDfsFileTableEntry> MetaDfsManager::table(const std::string& name) const {
  std::lock_guard lock(mutex_);
  const std::uint64_t count = count_or_throw(name);
  std::vector<MetaDfsFileTableEntry> rows;
  for (std::uint64_t b = 0; b < count; ++b) {
    const auto entry = dfs_.stat(constituent_name(name, b));
    if (!entry) throw Error(ErrorCode::kCorruptData, "missing constituent " + constituent_name(name, b));
    rows.push_back({entry->name, entry->size_bytes, entry->num_blocks, entry->replication, entry->block_locations});
  }
  return rows;
}

MetaCounters MetaDfsManager::counters(const std::string& name) const {
  std::lock_guard lock(mutex_);
  const auto it = counters_.find(name);
  return it == counters_.end() ? MetaCounters{} : it->second;
}

void MetaDfsManager::reset_counters() {
  std::lock_guard lock(mutex_);
  counters_.clear();
}

}  // namespace wormdb::meta
