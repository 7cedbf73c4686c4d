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

#include "wormdb/dfs.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace wormdb::dfs {
namespace fs = std::filesystem;

namespace {

[[noreturn]] void io_error(const std::string& what, const fs::path& path) {
  throw Error(ErrorCode::kIoError, what + " '" + path.string() + "'");
}

void write_file_atomically(const fs::path& path, const void* data, std::size_t size) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) io_error("cannot open", tmp);
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) io_error("short write", tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) io_error("cannot rename into", path);
}

std::string format_locations(const std::vector<std::vector<NodeId>>& locations) {
  std::string out;
  for (std::size_t b = 0; b < locations.size(); ++b) {
    if (b > 0) out += ';';
    for (std::size_t r = 0; r < locations[b].size(); ++r) {
      if (r > 0) out += ',';
      out += std::to_string(locations[b][r]);
    }
  }
  return out;
}

std::vector<std::vector<NodeId>> parse_locations(const std::string& text) {
  std::vector<std::vector<NodeId>> out;
  if (text.empty()) return out;
  std::stringstream blocks(text);
  std::string block;
  while (std::getline(blocks, block, ';')) {
    std::vector<NodeId> nodes;
    std::stringstream ids(block);
    std::string id;
    while (std::getline(ids, id, ',')) nodes.push_back(static_cast<NodeId>(std::stoul(id)));
    out.push_back(std::move(nodes));
  }
  return out;
}

DfsConfig checked(DfsConfig config) {
  config.validate();
  return config;
}

void check_name(const std::string& name) {
  if (name.empty() || name.find_first_of("\t\n\r") != std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "bad DFS file name");
  }
}

}  // namespace

std::string url_encode(std::string_view name) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : name) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 0xF];
    }
  }
  return out;
}

std::string url_decode(std::string_view encoded) {
  std::string out;
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    if (encoded[i] == '%' && i + 2 < encoded.size()) {
      out += static_cast<char>(std::stoi(std::string(encoded.substr(i + 1, 2)), nullptr, 16));
      i += 2;
    } else {
      out += encoded[i];
    }
  }
  return out;
}

void DfsConfig::validate() const {
  if (block_size_bytes == 0) throw Error(ErrorCode::kInvalidArgument, "block_size_bytes must be > 0");
  if (replication_factor == 0) throw Error(ErrorCode::kInvalidArgument, "replication factor must be >= 1");
  if (num_datanodes == 0) throw Error(ErrorCode::kInvalidArgument, "need at least one DataNode");
}

//==============================================================================
// DataNode

DataNode::DataNode(NodeId id, std::optional<fs::path> dir) : id_(id), dir_(std::move(dir)) {
  if (dir_) fs::create_directories(*dir_);
}

fs::path DataNode::block_path(const std::string& file, std::uint64_t ordinal) const {
  return *dir_ / (url_encode(file) + ".blk" + std::to_string(ordinal));
}

void DataNode::put(const std::string& file, std::uint64_t ordinal, ByteSpan content) {
  if (dir_) {
    write_file_atomically(block_path(file, ordinal), content.data(), content.size());
  } else {
    blocks_[{file, ordinal}] = Bytes(content.begin(), content.end());
  }
}

Bytes DataNode::get(const std::string& file, std::uint64_t ordinal, std::uint64_t offset,
                    std::uint64_t length) const {
  Bytes out(length);
  if (dir_) {
    const fs::path path = block_path(file, ordinal);
    std::ifstream in(path, std::ios::binary);
    if (!in) io_error("missing replica", path);
    in.seekg(static_cast<std::streamoff>(offset));
    in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(length));
    if (static_cast<std::uint64_t>(in.gcount()) != length) io_error("short read", path);
    return out;
  }
  const auto it = blocks_.find({file, ordinal});
  if (it == blocks_.end() || offset + length > it->second.size()) {
    throw Error(ErrorCode::kIoError, "replica missing on node " + std::to_string(id_));
  }
  std::copy_n(it->second.begin() + static_cast<std::ptrdiff_t>(offset), length, out.begin());
  return out;
}

bool DataNode::has(const std::string& file, std::uint64_t ordinal) const {
  if (dir_) return fs::exists(block_path(file, ordinal));
  return blocks_.contains({file, ordinal});
}

void DataNode::erase(const std::string& file, std::uint64_t ordinal) {
  if (dir_) {
    std::error_code ec;
    fs::remove(block_path(file, ordinal), ec);
  } else {
    blocks_.erase({file, ordinal});
  }
}

void DataNode::rename(const std::string& from, const std::string& to, std::uint64_t ordinal) {
  if (dir_) {
    std::error_code ec;
    fs::rename(block_path(from, ordinal), block_path(to, ordinal), ec);
    if (ec) io_error("cannot rename replica", block_path(from, ordinal));
    return;
  }
  auto node = blocks_.extract({from, ordinal});
  if (node.empty()) return;
  node.key() = {to, ordinal};
  blocks_.insert(std::move(node));
}

void DataNode::prune(const std::set<std::pair<std::string, std::uint64_t>>& live) {
  if (!dir_) return;
  for (const auto& entry : fs::directory_iterator(*dir_)) {
    const std::string fname = entry.path().filename().string();
    const auto pos = fname.rfind(".blk");
    bool keep = false;
    if (pos != std::string::npos) {
      try {
        keep = live.contains({url_decode(fname.substr(0, pos)), std::stoull(fname.substr(pos + 4))});
      } catch (const std::exception&) {
        keep = false;
      }
    }
    if (!keep) fs::remove(entry.path());
  }
}

//==============================================================================
// NameNode

NameNode::NameNode(std::optional<fs::path> root) : root_(std::move(root)) {
  if (root_) {
    fs::create_directories(*root_);
    load();
  }
}

void NameNode::load() {
  {
    std::ifstream in(*root_ / "namenode.tbl");
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> fields;
      std::stringstream ss(line);
      std::string field;
      while (std::getline(ss, field, '\t')) fields.push_back(field);
      if (fields.size() == 4) fields.emplace_back();
      if (fields.size() != 5) throw Error(ErrorCode::kCorruptData, "bad namenode.tbl record: " + line);
      DfsFileEntry entry;
      entry.name = fields[0];
      entry.size_bytes = std::stoull(fields[1]);
      entry.num_blocks = std::stoull(fields[2]);
      entry.replication = static_cast<std::uint32_t>(std::stoul(fields[3]));
      entry.block_locations = parse_locations(fields[4]);
      if (entry.block_locations.size() != entry.num_blocks) {
        throw Error(ErrorCode::kCorruptData, "location count mismatch for " + entry.name);
      }
      files_.emplace(entry.name, std::move(entry));
    }
  }
  std::ifstream in(*root_ / "metafiles.tbl");
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) metas_.insert(line);
  }
}

void NameNode::journal() const {
  if (!root_) return;
  std::string table;
  for (const auto& [name, e] : files_) {
    table += e.name + '\t' + std::to_string(e.size_bytes) + '\t' + std::to_string(e.num_blocks) + '\t' +
             std::to_string(e.replication) + '\t' + format_locations(e.block_locations) + '\n';
  }
  write_file_atomically(*root_ / "namenode.tbl", table.data(), table.size());
  std::string metas;
  for (const auto& m : metas_) metas += m + '\n';
  write_file_atomically(*root_ / "metafiles.tbl", metas.data(), metas.size());
}

const DfsFileEntry* NameNode::find(std::string_view name) const {
  const auto it = files_.find(name);
  return it == files_.end() ? nullptr : &it->second;
}

void NameNode::put(DfsFileEntry entry) {
  std::string key = entry.name;
  files_.insert_or_assign(std::move(key), std::move(entry));
  journal();
}

void NameNode::erase(std::string_view name) {
  const auto it = files_.find(name);
  if (it != files_.end()) files_.erase(it);
  journal();
}

std::vector<DfsFileEntry> NameNode::list(std::string_view prefix) const {
  std::vector<DfsFileEntry> out;
  for (auto it = files_.lower_bound(prefix); it != files_.end() && it->first.starts_with(prefix); ++it) {
    out.push_back(it->second);
  }
  return out;
}

bool NameNode::meta_registered(std::string_view name) const { return metas_.find(name) != metas_.end(); }

void NameNode::register_meta(const std::string& name) {
  metas_.insert(name);
  journal();
}

void NameNode::unregister_meta(std::string_view name) {
  const auto it = metas_.find(name);
  if (it != metas_.end()) metas_.erase(it);
  journal();
}

std::vector<std::string> NameNode::meta_names() const { return {metas_.begin(), metas_.end()}; }

//==============================================================================
// Dfs

Dfs::Dfs(DfsConfig config) : config_(checked(std::move(config))), namenode_(config_.root) {
  for (NodeId id = 0; id < config_.num_datanodes; ++id) {
    std::optional<fs::path> dir;
    if (config_.root) dir = *config_.root / ("node_" + std::to_string(id));
    nodes_.push_back(std::make_unique<DataNode>(id, std::move(dir)));
  }
  if (config_.root) {
    std::vector<std::set<std::pair<std::string, std::uint64_t>>> live(nodes_.size());
    for (const auto& [name, entry] : namenode_.files()) {
      for (std::uint64_t b = 0; b < entry.num_blocks; ++b) {
        for (NodeId n : entry.block_locations[b]) {
          if (n < live.size()) live[n].insert({name, b});
        }
      }
    }
    for (auto& node : nodes_) node->prune(live[node->id()]);
  }
}

std::size_t Dfs::alive_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const auto& n) { return n->alive(); }));
}

std::vector<NodeId> Dfs::place_block(const std::string& name, std::uint64_t ordinal) const {
  std::vector<NodeId> alive;
  for (const auto& n : nodes_) {
    if (n->alive()) alive.push_back(n->id());
  }
  const std::uint64_t key = crc64(ByteSpan(reinterpret_cast<const std::byte*>(name.data()), name.size())) ^
                            (config_.placement_seed * 0x9E3779B97F4A7C15ULL) ^ (ordinal + 1) * 0xC2B2AE3D27D4EB4FULL;
  std::mt19937_64 rng(key);
  std::shuffle(alive.begin(), alive.end(), rng);
  alive.resize(config_.replication_factor);
  return alive;
}

DfsFileEntry Dfs::create_file(const std::string& name, ByteSpan content) {
  check_name(name);
  std::unique_lock lock(mutex_);
  if (namenode_.find(name) != nullptr) throw Error(ErrorCode::kAlreadyExists, name);
  if (alive_count() < config_.replication_factor) {
    throw Error(ErrorCode::kInsufficientReplicaNodes,
                std::to_string(alive_count()) + " alive nodes, need " + std::to_string(config_.replication_factor));
  }
  const std::uint64_t block = config_.block_size_bytes;
  DfsFileEntry entry;
  entry.name = name;
  entry.size_bytes = content.size();
  entry.num_blocks = (content.size() + block - 1) / block;
  entry.replication = config_.replication_factor;
  for (std::uint64_t b = 0; b < entry.num_blocks; ++b) {
    const std::uint64_t begin = b * block;
    const std::uint64_t len = std::min<std::uint64_t>(block, content.size() - begin);
    std::vector<NodeId> holders = place_block(name, b);
    for (NodeId n : holders) nodes_[n]->put(name, b, content.subspan(begin, len));
    bytes_written_ += len * holders.size();
    entry.block_locations.push_back(std::move(holders));
  }
  namenode_.put(entry);
  ++files_created_;
  return entry;
}

Bytes Dfs::read_range(const std::string& name, std::uint64_t offset, std::uint64_t length) const {
  std::shared_lock lock(mutex_);
  const DfsFileEntry* entry = namenode_.find(name);
  if (entry == nullptr) throw Error(ErrorCode::kNotFound, name);
  if (offset > entry->size_bytes || length > entry->size_bytes - offset) {
    throw Error(ErrorCode::kOutOfRange, name + " [" + std::to_string(offset) + ", +" + std::to_string(length) + ")");
  }
  const std::uint64_t block = config_.block_size_bytes;
  Bytes out;
  out.reserve(length);
  std::uint64_t pos = offset;
  const std::uint64_t end = offset + length;
  while (pos < end) {
    const std::uint64_t b = pos / block;
    const std::uint64_t intra = pos % block;
    const std::uint64_t len = std::min(block - intra, end - pos);
    const DataNode* source = nullptr;
    for (NodeId n : entry->block_locations[b]) {
      if (nodes_[n]->alive()) {
        source = nodes_[n].get();
        break;
      }
    }
    if (source == nullptr) {
      throw Error(ErrorCode::kAllReplicasDead, name + " block " + std::to_string(b));
    }
    if (config_.remote_read_latency.count() > 0) std::this_thread::sleep_for(config_.remote_read_latency);
    Bytes part = source->get(name, b, intra, len);
    out.insert(out.end(), part.begin(), part.end());
    ++read_calls_;
    network_bytes_ += len;
    pos += len;
  }
  return out;
}

void Dfs::delete_file(const std::string& name) {
  std::unique_lock lock(mutex_);
  const DfsFileEntry* found = namenode_.find(name);
  if (found == nullptr) throw Error(ErrorCode::kNotFound, name);
  const DfsFileEntry entry = *found;
  namenode_.erase(name);
  for (std::uint64_t b = 0; b < entry.num_blocks; ++b) {
    for (NodeId n : entry.block_locations[b]) nodes_[n]->erase(name, b);
  }
  ++files_deleted_;
}

void Dfs::rename_file(const std::string& from, const std::string& to) {
  check_name(to);
  std::unique_lock lock(mutex_);
  const DfsFileEntry* found = namenode_.find(from);
  if (found == nullptr) throw Error(ErrorCode::kNotFound, from);
  if (namenode_.find(to) != nullptr) throw Error(ErrorCode::kAlreadyExists, to);
  DfsFileEntry entry = *found;
  for (std::uint64_t b = 0; b < entry.num_blocks; ++b) {
    for (NodeId n : entry.block_locations[b]) nodes_[n]->rename(from, to, b);
  }
  entry.name = to;
  namenode_.put(entry);
  namenode_.erase(from);
  ++files_renamed_;
}

void Dfs::set_node_alive(NodeId node, bool alive) {
  std::unique_lock lock(mutex_);
  if (node >= nodes_.size()) throw Error(ErrorCode::kUnknownNode, std::to_string(node));
  nodes_[node]->set_alive(alive);
}

bool Dfs::node_alive(NodeId node) const {
  std::shared_lock lock(mutex_);
  if (node >= nodes_.size()) throw Error(ErrorCode::kUnknownNode, std::to_string(node));
  return nodes_[node]->alive();
}

std::optional<DfsFileEntry> Dfs::stat(const std::string& name) const {
  std::shared_lock lock(mutex_);
  const DfsFileEntry* entry = namenode_.find(name);
  if (entry == nullptr) return std::nullopt;
  return *entry;
}

bool Dfs::exists(const std::string& name) const {
  std::shared_lock lock(mutex_);
  return namenode_.find(name) != nullptr;
}

std::vector<DfsFileEntry> Dfs::list(std::string_view prefix) const {
  std::shared_lock lock(mutex_);
  return namenode_.list(prefix);
}

void Dfs::register_meta(const std::string& name) {
  check_name(name);
  std::unique_lock lock(mutex_);
  if (namenode_.meta_registered(name)) throw Error(ErrorCode::kAlreadyExists, "meta file " + name);
  namenode_.register_meta(name);
}

void Dfs::unregister_meta(const std::string& name) {
  std::unique_lock lock(mutex_);
  if (!namenode_.meta_registered(name)) throw Error(ErrorCode::kNotFound, "meta file " + name);
  namenode_.unregister_meta(name);
}

bool Dfs::meta_registered(const std::string& name) const {
  std::shared_lock lock(mutex_);
  return namenode_.meta_registered(name);
}

std::vector<std::string> Dfs::meta_names() const {
  std::shared_lock lock(mutex_);
  return namenode_.meta_names();
}

std::optional<Bytes> Dfs::replica(NodeId node, const std::string& name, std::uint64_t ordinal) const {
  std::shared_lock lock(mutex_);
  const DfsFileEntry* entry = namenode_.find(name);
  if (entry == nullptr || node >= nodes_.size() || ordinal >= entry->num_blocks) return std::nullopt;
  if (!nodes_[node]->has(name, ordinal)) return std::nullopt;
  const std::uint64_t len =
      std::min<std::uint64_t>(config_.block_size_bytes, entry->size_bytes - ordinal * config_.block_size_bytes);
  return nodes_[node]->get(name, ordinal, 0, len);
}

DfsCounters Dfs::counters() const noexcept {
  return {read_calls_.load(), network_bytes_.load(), files_created_.load(),
          files_deleted_.load(), files_renamed_.load(), bytes_written_.load()};
}

void Dfs::reset_counters() noexcept {
  read_calls_ = 0;
  network_bytes_ = 0;
  files_created_ = 0;
  files_deleted_ = 0;
  files_renamed_ = 0;
  bytes_written_ = 0;
}

}  // namespace wormdb::dfs
