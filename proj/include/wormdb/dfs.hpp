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
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "wormdb/common.hpp"

namespace wormdb::dfs {

using NodeId = std::uint32_t;

struct DfsConfig {
  std::uint64_t block_size_bytes = 64 * 1024;
  std::uint32_t replication_factor = 3;
  std::uint64_t placement_seed = 0;
  std::uint32_t num_datanodes = 5;
  // Fixed delay charged to every DataNode read.
  std::chrono::microseconds remote_read_latency{0};
  // Persistent mode when set: one directory per DataNode plus the NameNode journal.
  std::optional<std::filesystem::path> root;

  void validate() const;
};

struct DfsFileEntry {
  std::string name;
  std::uint64_t size_bytes = 0;
  std::uint64_t num_blocks = 0;
  std::uint32_t replication = 0;
  // One entry per block; each holds the DataNodes storing a replica.
  std::vector<std::vector<NodeId>> block_locations;

  bool operator==(const DfsFileEntry&) const = default;
};

struct DfsCounters {
  std::uint64_t read_calls = 0;
  std::uint64_t network_bytes = 0;
  std::uint64_t files_created = 0;
  std::uint64_t files_deleted = 0;
  std::uint64_t files_renamed = 0;
  std::uint64_t bytes_written = 0;
};

/// One storage server. Holds block replicas keyed by (file name, block ordinal),
/// either in memory or under its own directory.
class DataNode {
 public:
  DataNode(NodeId id, std::optional<std::filesystem::path> dir);

  NodeId id() const noexcept { return id_; }
  bool alive() const noexcept { return alive_; }
  void set_alive(bool alive) noexcept { alive_ = alive; }

  void put(const std::string& file, std::uint64_t ordinal, ByteSpan content);
  Bytes get(const std::string& file, std::uint64_t ordinal, std::uint64_t offset, std::uint64_t length) const;
  bool has(const std::string& file, std::uint64_t ordinal) const;
  void erase(const std::string& file, std::uint64_t ordinal);
  void rename(const std::string& from, const std::string& to, std::uint64_t ordinal);

  /// Drops stored blocks that are not referenced by `live` (startup cleanup in persistent mode).
  void prune(const std::set<std::pair<std::string, std::uint64_t>>& live);

 private:
  std::filesystem::path block_path(const std::string& file, std::uint64_t ordinal) const;

  NodeId id_;
  bool alive_ = true;
  std::optional<std::filesystem::path> dir_;
  std::map<std::pair<std::string, std::uint64_t>, Bytes> blocks_;
};

/// File metadata service: the file table, the registered meta-file names and
/// the journal that persists both.
class NameNode {
 public:
  explicit NameNode(std::optional<std::filesystem::path> root);

  const DfsFileEntry* find(std::string_view name) const;
  void put(DfsFileEntry entry);
  void erase(std::string_view name);
  std::vector<DfsFileEntry> list(std::string_view prefix) const;
  const std::map<std::string, DfsFileEntry, std::less<>>& files() const noexcept { return files_; }

  bool meta_registered(std::string_view name) const;
  void register_meta(const std::string& name);
  void unregister_meta(std::string_view name);
  std::vector<std::string> meta_names() const;

 private:
  void load();
  void journal() const;

  std::optional<std::filesystem::path> root_;
  std::map<std::string, DfsFileEntry, std::less<>> files_;
  std::set<std::string, std::less<>> metas_;
};

/// In-process write-once-read-many distributed file system: a NameNode, a set
/// of DataNodes and the four client calls (create, read, rename, delete).
/// All public members are safe to call concurrently.
class Dfs {
 public:
  explicit Dfs(DfsConfig config);

  Dfs(const Dfs&) = delete;
  Dfs& operator=(const Dfs&) = delete;

  const DfsConfig& config() const noexcept { return config_; }

  DfsFileEntry create_file(const std::string& name, ByteSpan content);
  Bytes read_range(const std::string& name, std::uint64_t offset, std::uint64_t length) const;
  void delete_file(const std::string& name);
  void rename_file(const std::string& from, const std::string& to);

  void set_node_alive(NodeId node, bool alive);
  bool node_alive(NodeId node) const;
  std::size_t node_count() const noexcept { return nodes_.size(); }

  std::optional<DfsFileEntry> stat(const std::string& name) const;
  bool exists(const std::string& name) const;
  std::vector<DfsFileEntry> list(std::string_view prefix) const;

  void register_meta(const std::string& name);
  void unregister_meta(const std::string& name);
  bool meta_registered(const std::string& name) const;
  std::vector<std::string> meta_names() const;

  /// Raw replica bytes held by one node, bypassing liveness (test observability).
  std::optional<Bytes> replica(NodeId node, const std::string& name, std::uint64_t ordinal) const;

  DfsCounters counters() const noexcept;
  void reset_counters() noexcept;

 private:
  std::vector<NodeId> place_block(const std::string& name, std::uint64_t ordinal) const;
  std::size_t alive_count() const;

  DfsConfig config_;
  mutable std::shared_mutex mutex_;
  NameNode namenode_;
  std::vector<std::unique_ptr<DataNode>> nodes_;

  mutable std::atomic<std::uint64_t> read_calls_{0};
  mutable std::atomic<std::uint64_t> network_bytes_{0};
  std::atomic<std::uint64_t> files_created_{0};
  std::atomic<std::uint64_t> files_deleted_{0};
  std::atomic<std::uint64_t> files_renamed_{0};
  std::atomic<std::uint64_t> bytes_written_{0};
};

std::string url_encode(std::string_view name);
std::string url_decode(std::string_view encoded);

}  // namespace wormdb::dfs
