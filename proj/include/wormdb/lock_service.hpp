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

#include <condition_variable>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "wormdb/common.hpp"

namespace wormdb::lock {

enum class LockType { kRead, kWrite };
enum class LockState { kWaiting, kGranted, kReleased };

using LockId = std::uint64_t;
using OwnerId = std::uint64_t;

std::string_view lock_type_name(LockType type) noexcept;
std::string_view lock_state_name(LockState state) noexcept;

struct LockNode {
  std::string db_name;
  LockId lockid = 0;
  LockType lock_type = LockType::kRead;
  OwnerId owner = 0;
  LockState state = LockState::kWaiting;
  // Predecessor this node is waiting on, if any.
  std::optional<LockId> watching;
};

/// Database-granularity read/write locks granted in lockid order.
///
/// Each request becomes a node with the next lockid for its database. A read
/// is granted once no earlier write remains; a write once no earlier node
/// remains, except a read already held by the same owner. A blocked node
/// watches the newest of its blockers and is re-evaluated when that node is
/// released, re-watching if other blockers remain.
///
/// A request that would close a wait-for cycle (two owners each holding a read
/// and both asking for the write, for instance) fails with UpgradeConflict.
class LockService {
 public:
  LockService() = default;
  LockService(const LockService&) = delete;
  LockService& operator=(const LockService&) = delete;

  /// Enqueues and blocks until granted.
  LockId request_lock(const std::string& db_name, LockType type, OwnerId owner);

  /// Enqueues without blocking; the node may already be granted on return.
  LockId enqueue(const std::string& db_name, LockType type, OwnerId owner);
  bool is_granted(const std::string& db_name, LockId lockid) const;
  void wait(const std::string& db_name, LockId lockid);

  void release_lock(const std::string& db_name, LockId lockid);

  std::vector<LockNode> snapshot(const std::string& db_name) const;

  /// Fails every current and future waiter with ServiceShutdown.
  void shutdown();

 private:
  struct Queue {
    LockId next_lockid = 1;
    std::map<LockId, LockNode> nodes;
  };

  std::vector<LockId> blockers(const Queue& queue, const LockNode& node) const;
  bool closes_cycle(const Queue& queue, const LockNode& node) const;
  void evaluate(Queue& queue, LockNode& node);

  mutable std::mutex mutex_;
  std::condition_variable changed_;
  std::map<std::string, Queue, std::less<>> queues_;
  bool shutdown_ = false;
};

}  // namespace wormdb::lock
