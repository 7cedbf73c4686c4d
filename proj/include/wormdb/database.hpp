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

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wormdb/buffer_pool.hpp"
#include "wormdb/catalog.hpp"
#include "wormdb/dfs.hpp"
#include "wormdb/fault.hpp"
#include "wormdb/lock_service.hpp"
#include "wormdb/meta_dfs.hpp"
#include "wormdb/records.hpp"
#include "wormdb/secondary_index.hpp"
#include "wormdb/spdu_dfs.hpp"

namespace wormdb::engine {

struct EngineConfig {
  std::uint64_t page_size = 4096;
  spdu::SpduDfsConfig storage;
  std::size_t pool_frames = BufferPool::kDefaultFrames;
};

enum class OpenMode {
  kRecover,       // run restart_system if the last writer crashed
  kRequireClean,  // throw RecoveryNeeded instead
  kManual,        // leave a crashed database alone for an explicit recover()
};

/// Handle on one UserVisits database: data meta file `<name>/data`, log meta
/// file `<name>/log`. The database lock is named after the data meta file.
///
/// Shared by all sessions of a process; sessions carry all transaction state.
class Database {
 public:
  /// Opens `name`, creating it with `total_pages` pages when absent
  /// (`total_pages` is ignored for an existing database).
  Database(dfs::Dfs& dfs, lock::LockService& locks, std::string name, std::uint64_t total_pages,
           EngineConfig config = {}, FaultInjector* faults = nullptr, OpenMode mode = OpenMode::kRecover);

  Database(const Database&) = delete;
  Database& operator=(const Database&) = delete;

  const std::string& name() const noexcept { return name_; }
  const std::string& data_file() const noexcept { return data_file_; }
  const std::string& log_file() const noexcept { return log_file_; }
  const EngineConfig& config() const noexcept { return config_; }
  bool created() const noexcept { return created_; }

  meta::MetaDfsManager& files() noexcept { return files_; }
  dfs::Dfs& dfs() noexcept { return dfs_; }
  lock::LockService& locks() noexcept { return locks_; }
  FaultInjector* faults() const noexcept { return faults_; }

  /// Takes the write lock, runs restart_system and applies any committed log
  /// still awaiting post-commit. Reports redo when committed log data was
  /// applied, rollback when an uncommitted tail was dropped.
  spdu::RecoveryPath recover();
  bool needs_recovery();

  lock::OwnerId next_owner() noexcept { return ++owners_; }

  static bool exists(dfs::Dfs& dfs, const std::string& name);

 private:
  void bootstrap_catalog();

  dfs::Dfs& dfs_;
  lock::LockService& locks_;
  std::string name_;
  std::string data_file_;
  std::string log_file_;
  EngineConfig config_;
  FaultInjector* faults_;
  meta::MetaDfsManager files_;
  bool created_ = false;
  std::atomic<lock::OwnerId> owners_{0};
};

enum class LockMode { kNone, kRead, kWrite };

struct SessionCounters {
  std::uint64_t page_reads = 0;
  std::uint64_t page_writes = 0;
};

/// One thread of control. Pages are accessible only between begin() and
/// commit()/abort()/release().
class Session {
 public:
  explicit Session(Database& db);
  /// Drops the lock without touching storage, like a lock node that vanishes
  /// with its client.
  ~Session();

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  void begin(LockMode mode);
  LockMode lock_mode() const noexcept { return mode_; }
  lock::OwnerId owner() const noexcept { return owner_; }
  std::optional<lock::LockId> lockid() const noexcept { return lockid_; }

  Rid insert_record(const UserVisitsRecord& record);
  std::vector<UserVisitsRecord> scan(std::uint64_t limit);
  std::vector<UserVisitsRecord> select_by_key(std::string_view source_ip, bool use_index);
  std::uint64_t update_by_key(std::string_view source_ip, const std::string& new_country_code, bool use_index);

  void commit();
  void abort();
  /// Ends a read transaction. On a write transaction this is abort().
  void release();

  std::uint64_t record_count() const;
  const Catalog& catalog() const;
  /// Committed index entries plus this transaction's pending ones, sorted.
  std::vector<IndexEntry> index_entries();
  /// (sourceIP, rid) of every row from a full heap scan, sorted like the index.
  std::vector<IndexEntry> scan_keys();

  SessionCounters counters() const noexcept;
  void reset_counters() noexcept;
  spdu::SpduDfs& storage() noexcept { return storage_; }

 private:
  void require_lock() const;
  void require_write() const;
  void load_catalog();
  void end_transaction();
  std::vector<Rid> locate(std::string_view source_ip, bool use_index);
  template <typename Fn>
  void for_each_row(Fn&& fn);

  Database& db_;
  lock::OwnerId owner_;
  spdu::SpduDfs storage_;
  BufferPool pool_;
  LockMode mode_ = LockMode::kNone;
  std::optional<lock::LockId> lockid_;
  std::optional<Catalog> catalog_;
  bool catalog_dirty_ = false;
  std::vector<IndexEntry> pending_;
  friend class Database;
};

}  // namespace wormdb::engine
