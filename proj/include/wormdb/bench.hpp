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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wormdb/database.hpp"
#include "wormdb/dfs.hpp"
#include "wormdb/fault.hpp"
#include "wormdb/records.hpp"

namespace wormdb::bench {

inline constexpr const char* kDefaultProbeKey = "160.110.44.44";
inline constexpr const char* kDatabaseName = "uservisits";

/// Storage and engine knobs; the JSON form is the CLI config file.
struct BenchConfig {
  std::uint64_t page_size = 4096;
  std::uint64_t block_size = 64 * 1024;
  std::uint32_t replication = 3;
  std::uint32_t num_datanodes = 5;
  std::uint64_t placement_seed = 0;
  std::uint64_t post_commit_threshold = 64;
  bool deferred = true;
  std::uint64_t latency_us = 0;
  std::size_t pool_frames = engine::BufferPool::kDefaultFrames;

  static BenchConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  dfs::DfsConfig dfs(std::optional<std::filesystem::path> root = std::nullopt) const;
  engine::EngineConfig engine() const;
};

struct GenerateOptions {
  std::uint64_t tuples = 100000;
  std::uint64_t seed = 42;
  std::string probe_key = kDefaultProbeKey;
  std::uint64_t probe_count = 70;
  // Rows per transaction while loading.
  std::uint64_t commit_every = 10000;
};

/// Deterministic rows sorted by visitDate. Exactly `probe_count` rows carry
/// `probe_key`, placed in runs of up to 10 consecutive rows (one visit session
/// each) spread evenly over the table. No other row uses the probe key.
std::vector<engine::UserVisitsRecord> generate_rows(const GenerateOptions& options);

/// Fresh rows for the insert workload, dated after every generated row.
std::vector<engine::UserVisitsRecord> insert_rows(std::uint64_t count, std::uint64_t seed,
                                                  const std::string& probe_key);

/// Address space for `tuples` rows plus `headroom` later inserts.
std::uint64_t suggested_total_pages(std::uint64_t tuples, std::uint64_t page_size, std::uint64_t headroom = 20000);

enum class WorkloadKind { kScan, kInsert, kSelect, kUpdate };

std::string_view workload_name(WorkloadKind kind) noexcept;
WorkloadKind parse_workload(std::string_view name);

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::kScan;
  std::uint64_t limit = 100000;
  std::uint64_t repeat = 10000;
  std::string key = kDefaultProbeKey;
  bool use_index = true;
  std::string new_country_code = "ABC";
  std::optional<std::string> crash_point;
  CrashAction crash_action = CrashAction::kThrow;
  std::uint64_t seed = 42;

  /// Throws InvalidArgument on a zero count or an unregistered crash point.
  void validate() const;
};

struct MetricsReport {
  std::string operation;
  std::chrono::duration<double, std::milli> elapsed{0};
  std::uint64_t page_reads = 0;
  std::uint64_t page_writes = 0;
  std::uint64_t dfs_remakes = 0;
  std::uint64_t network_bytes = 0;
  std::uint64_t records_returned = 0;
  std::string recovery_path = "none";

  nlohmann::json to_json() const;
  static std::string csv_header();
  std::string to_csv() const;
};

MetricsReport generate(engine::Database& db, const GenerateOptions& options);
/// Runs one workload in a fresh session with an empty buffer pool.
MetricsReport run(engine::Database& db, const WorkloadSpec& spec);
MetricsReport recover(engine::Database& db);

struct SoakReport {
  std::uint64_t sessions = 0;
  std::uint64_t transactions = 0;
  std::uint64_t commits = 0;
  std::uint64_t aborts = 0;
  std::uint64_t committed_inserts = 0;
  std::vector<std::string> violations;

  nlohmann::json to_json() const;
};

/// K threads running random read and write transactions against `db`, then
/// checks row count, index/table coherence and index-vs-scan agreement.
SoakReport soak(engine::Database& db, std::uint64_t sessions, std::uint64_t transactions_per_session,
                std::uint64_t seed, const std::string& probe_key = kDefaultProbeKey);

}  // namespace wormdb::bench
