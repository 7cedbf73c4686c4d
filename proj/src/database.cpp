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

#include "wormdb/database.hpp"

#include <algorithm>

#include "wormdb/slotted_page.hpp"

namespace wormdb::engine {
namespace {

lock::LockType lock_type(LockMode mode) { return mode == LockMode::kWrite ? lock::LockType::kWrite : lock::LockType::kRead; }

}  // namespace

Database::Database(dfs::Dfs& dfs, lock::LockService& locks, std::string name, std::uint64_t total_pages,
                   EngineConfig config, FaultInjector* faults, OpenMode mode)
    : dfs_(dfs),
      locks_(locks),
      name_(std::move(name)),
      data_file_(name_ + "/data"),
      log_file_(name_ + "/log"),
      config_(config),
      faults_(faults),
      files_(dfs, meta::PageConfig::for_block(dfs.config().block_size_bytes, config.page_size), faults) {
  if (config_.page_size < Catalog::kEncodedSize + 16) {
    throw Error(ErrorCode::kInvalidArgument, "page size " + std::to_string(config_.page_size) + " is too small");
  }
  if (!files_.exists(data_file_)) {
    if (files_.exists(log_file_)) throw Error(ErrorCode::kCorruptData, name_ + " has a log but no data file");
    spdu::SpduDfs::create(files_, data_file_, log_file_, total_pages);
    created_ = true;
  } else if (!files_.exists(log_file_)) {
    throw Error(ErrorCode::kCorruptData, name_ + " has data but no log file");
  }
  if (needs_recovery()) {
    if (mode == OpenMode::kRequireClean) throw Error(ErrorCode::kRecoveryNeeded, name_ + " needs recovery");
    if (mode == OpenMode::kManual) return;
    recover();
    return;
  }
  bootstrap_catalog();
}

bool Database::exists(dfs::Dfs& dfs, const std::string& name) { return dfs.meta_registered(name + "/data"); }

bool Database::needs_recovery() {
  spdu::SpduDfs storage(files_, data_file_, log_file_, config_.storage, faults_);
  return storage.needs_recovery();
}

spdu::RecoveryPath Database::recover() {
  const lock::OwnerId owner = next_owner();
  const lock::LockId lockid = locks_.request_lock(data_file_, lock::LockType::kWrite, owner);
  try {
    spdu::SpduDfs storage(files_, data_file_, log_file_, config_.storage, faults_);
    spdu::RecoveryPath path = storage.restart_system();
    // Finish deferred post-commit too, so a recovered database has an empty log.
    if (storage.committed_blocks() > 0) {
      storage.batch_post_commit();
      if (path == spdu::RecoveryPath::kNone) path = spdu::RecoveryPath::kRedo;
    }
    locks_.release_lock(data_file_, lockid);
    bootstrap_catalog();
    return path;
  } catch (...) {
    locks_.release_lock(data_file_, lockid);
    throw;
  }
}

void Database::bootstrap_catalog() {
  Session probe(*this);
  probe.begin(LockMode::kRead);
  const bool present = probe.catalog_.has_value();
  probe.release();
  if (present) return;
  Session writer(*this);
  writer.begin(LockMode::kWrite);
  if (writer.catalog_) {
    writer.abort();
    return;
  }
  writer.catalog_ = Catalog::initial(writer.storage_.page_count());
  writer.catalog_dirty_ = true;
  writer.commit();
}

Session::Session(Database& db)
    : db_(db),
      owner_(db.next_owner()),
      storage_(db.files(), db.data_file(), db.log_file(), db.config().storage, db.faults()),
      pool_(storage_, db.config().pool_frames) {}

Session::~Session() {
  if (!lockid_) return;
  try {
    db_.locks().release_lock(db_.data_file(), *lockid_);
  } catch (...) {
  }
}

void Session::begin(LockMode mode) {
  if (mode == LockMode::kNone) throw Error(ErrorCode::kInvalidArgument, "begin needs a read or write mode");
  if (mode_ != LockMode::kNone) throw Error(ErrorCode::kInvalidArgument, "session already holds a lock");
  lockid_ = db_.locks().request_lock(db_.data_file(), lock_type(mode), owner_);
  mode_ = mode;
  try {
    pool_.discard();
    storage_.on_lock_acquired(mode == LockMode::kWrite);
    load_catalog();
  } catch (const InjectedCrash&) {
    throw;
  } catch (...) {
    end_transaction();
    throw;
  }
}

void Session::load_catalog() { catalog_ = Catalog::decode(pool_.get(0)); }

void Session::end_transaction() {
  if (lockid_) {
    const lock::LockId lockid = *lockid_;
    lockid_.reset();
    db_.locks().release_lock(db_.data_file(), lockid);
  }
  mode_ = LockMode::kNone;
  catalog_.reset();
  catalog_dirty_ = false;
  pending_.clear();
  pool_.discard();
}

void Session::require_lock() const {
  if (mode_ == LockMode::kNone) throw Error(ErrorCode::kNoLockHeld, "begin() a transaction first");
  if (!catalog_) throw Error(ErrorCode::kNotFound, db_.name() + " has no catalog");
}

void Session::require_write() const {
  require_lock();
  if (mode_ != LockMode::kWrite) throw Error(ErrorCode::kNoLockHeld, "operation needs the write lock");
}

const Catalog& Session::catalog() const {
  require_lock();
  return *catalog_;
}

std::uint64_t Session::record_count() const { return catalog().record_count; }

template <typename Fn>
void Session::for_each_row(Fn&& fn) {
  const Catalog& c = *catalog_;
  for (PageId pid = c.heap_start; pid < c.heap_start + c.heap_used_pages; ++pid) {
    SlottedPage page(pool_.get(pid));
    for (std::uint16_t slot = 0; slot < page.slot_count(); ++slot) {
      if (!fn(Rid{pid, slot}, page.get(slot))) return;
    }
  }
}

Rid Session::insert_record(const UserVisitsRecord& record) {
  require_write();
  record.validate();
  const Bytes bytes = record.serialize();
  const std::size_t capacity = record.reserved_size();
  if (capacity > SlottedPage::max_record(storage_.payload_size())) {
    throw Error(ErrorCode::kRecordTooLarge, std::to_string(capacity) + "-byte record does not fit a page");
  }
  Catalog& c = *catalog_;
  std::optional<Rid> rid;
  if (c.heap_used_pages > 0) {
    const PageId tail = c.heap_start + c.heap_used_pages - 1;
    SlottedPage page(pool_.get(tail));
    if (auto slot = page.insert(bytes, capacity)) {
      pool_.mark_dirty(tail);
      rid = Rid{tail, *slot};
    }
  }
  if (!rid) {
    if (c.heap_used_pages == c.heap_capacity) {
      throw Error(ErrorCode::kDatabaseFull, "all " + std::to_string(c.heap_capacity) + " heap pages are in use");
    }
    const PageId next = c.heap_start + c.heap_used_pages;
    SlottedPage page(pool_.fresh(next));
    rid = Rid{next, *page.insert(bytes, capacity)};
    ++c.heap_used_pages;
  }
  ++c.record_count;
  catalog_dirty_ = true;
  pending_.push_back({record.source_ip, *rid});
  return *rid;
}

std::vector<UserVisitsRecord> Session::scan(std::uint64_t limit) {
  require_lock();
  std::vector<UserVisitsRecord> out;
  if (limit == 0) return out;
  for_each_row([&](Rid, ByteSpan bytes) {
    out.push_back(UserVisitsRecord::deserialize(bytes));
    return out.size() < limit;
  });
  return out;
}

std::vector<Rid> Session::locate(std::string_view source_ip, bool use_index) {
  std::vector<Rid> rids;
  if (use_index) {
    rids = SecondaryIndex(pool_, *catalog_, storage_.payload_size()).lookup(source_ip);
    for (const IndexEntry& e : pending_) {
      if (e.key == source_ip) rids.push_back(e.rid);
    }
    std::sort(rids.begin(), rids.end());
  } else {
    for_each_row([&](Rid rid, ByteSpan bytes) {
      if (UserVisitsRecord::deserialize(bytes).source_ip == source_ip) rids.push_back(rid);
      return true;
    });
  }
  return rids;
}

std::vector<UserVisitsRecord> Session::select_by_key(std::string_view source_ip, bool use_index) {
  require_lock();
  std::vector<UserVisitsRecord> out;
  if (!use_index) {
    for_each_row([&](Rid, ByteSpan bytes) {
      UserVisitsRecord record = UserVisitsRecord::deserialize(bytes);
      if (record.source_ip == source_ip) out.push_back(std::move(record));
      return true;
    });
    return out;
  }
  for (const Rid& rid : locate(source_ip, true)) {
    SlottedPage page(pool_.get(rid.pageid));
    UserVisitsRecord record = UserVisitsRecord::deserialize(page.get(rid.slot));
    if (record.source_ip != source_ip) {
      throw Error(ErrorCode::kCorruptData, "index entry points at a row with a different key");
    }
    out.push_back(std::move(record));
  }
  return out;
}

std::uint64_t Session::update_by_key(std::string_view source_ip, const std::string& new_country_code, bool use_index) {
  require_write();
  if (new_country_code.size() > UserVisitsRecord::kMaxCountryCode) {
    throw Error(ErrorCode::kValueTooLong, "countryCode limit is 3 bytes");
  }
  const std::vector<Rid> rids = locate(source_ip, use_index);
  for (const Rid& rid : rids) {
    SlottedPage page(pool_.get(rid.pageid));
    UserVisitsRecord record = UserVisitsRecord::deserialize(page.get(rid.slot));
    record.country_code = new_country_code;
    page.update(rid.slot, record.serialize());
    pool_.mark_dirty(rid.pageid);
  }
  return rids.size();
}

void Session::commit() {
  require_write();
  if (!pending_.empty()) {
    SecondaryIndex(pool_, *catalog_, storage_.payload_size()).add_segment(pending_);
    pending_.clear();
    catalog_dirty_ = true;
  }
  if (catalog_dirty_) {
    const Bytes encoded = catalog_->encode(storage_.payload_size());
    std::copy(encoded.begin(), encoded.end(), pool_.fresh(0).begin());
  }
  pool_.flush();
  fault_point(db_.faults(), "engine.commit.after_page_flush");
  storage_.commit_transaction();
  end_transaction();
}

void Session::abort() {
  require_write();
  pool_.discard();
  storage_.abort_transaction();
  end_transaction();
}

void Session::release() {
  if (mode_ == LockMode::kNone) throw Error(ErrorCode::kNoLockHeld, "no transaction to release");
  if (mode_ == LockMode::kWrite) {
    abort();
  } else {
    end_transaction();
  }
}

std::vector<IndexEntry> Session::index_entries() {
  require_lock();
  std::vector<IndexEntry> out = SecondaryIndex(pool_, *catalog_, storage_.payload_size()).all_entries();
  out.insert(out.end(), pending_.begin(), pending_.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<IndexEntry> Session::scan_keys() {
  require_lock();
  std::vector<IndexEntry> out;
  for_each_row([&](Rid rid, ByteSpan bytes) {
    out.push_back({UserVisitsRecord::deserialize(bytes).source_ip, rid});
    return true;
  });
  std::sort(out.begin(), out.end());
  return out;
}

SessionCounters Session::counters() const noexcept {
  return {pool_.counters().page_reads, pool_.counters().page_writes};
}

void Session::reset_counters() noexcept { pool_.reset_counters(); }

}  // namespace wormdb::engine
