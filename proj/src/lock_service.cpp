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

#include "wormdb/lock_service.hpp"

#include <algorithm>
#include <set>

namespace wormdb::lock {

std::string_view lock_type_name(LockType type) noexcept { return type == LockType::kRead ? "read" : "write"; }

std::string_view lock_state_name(LockState state) noexcept {
  switch (state) {
    case LockState::kWaiting: return "waiting";
    case LockState::kGranted: return "granted";
    case LockState::kReleased: return "released";
  }
  return "unknown";
}

std::vector<LockId> LockService::blockers(const Queue& queue, const LockNode& node) const {
  std::vector<LockId> out;
  for (auto it = queue.nodes.begin(); it != queue.nodes.end() && it->first < node.lockid; ++it) {
    const LockNode& earlier = it->second;
    if (node.lock_type == LockType::kRead) {
      if (earlier.lock_type == LockType::kWrite) out.push_back(earlier.lockid);
    } else if (!(earlier.lock_type == LockType::kRead && earlier.owner == node.owner &&
                 earlier.state == LockState::kGranted)) {
      out.push_back(earlier.lockid);
    }
  }
  return out;
}

// Wait-for edges: a waiting node depends on each of its blockers; a granted
// node depends on every waiting node of its owner (the owner will not release
// it while blocked).
bool LockService::closes_cycle(const Queue& queue, const LockNode& start) const {
  std::vector<LockId> stack = blockers(queue, start);
  std::set<LockId> seen;
  while (!stack.empty()) {
    const LockId id = stack.back();
    stack.pop_back();
    if (id == start.lockid) return true;
    if (!seen.insert(id).second) continue;
    const LockNode& node = queue.nodes.at(id);
    if (node.state == LockState::kWaiting) {
      for (LockId b : blockers(queue, node)) stack.push_back(b);
    } else {
      for (const auto& [other_id, other] : queue.nodes) {
        if (other.owner == node.owner && other.state == LockState::kWaiting) stack.push_back(other_id);
      }
    }
  }
  return false;
}

void LockService::evaluate(Queue& queue, LockNode& node) {
  const std::vector<LockId> blocking = blockers(queue, node);
  if (blocking.empty()) {
    node.state = LockState::kGranted;
    node.watching.reset();
  } else {
    // The blocker requested last.
    node.watching = blocking.back();
  }
}

LockId LockService::enqueue(const std::string& db_name, LockType type, OwnerId owner) {
  std::lock_guard lock(mutex_);
  if (shutdown_) throw Error(ErrorCode::kServiceShutdown, "lock service is shut down");
  auto it = queues_.find(db_name);
  if (it == queues_.end()) it = queues_.emplace(db_name, Queue{}).first;
  Queue& queue = it->second;
  const LockId id = queue.next_lockid++;
  LockNode& node = queue.nodes.emplace(id, LockNode{db_name, id, type, owner, LockState::kWaiting, std::nullopt})
                       .first->second;
  evaluate(queue, node);
  if (node.state == LockState::kWaiting && closes_cycle(queue, node)) {
    queue.nodes.erase(id);
    throw Error(ErrorCode::kUpgradeConflict, "lock request " + std::to_string(id) + " on " + db_name +
                                                 " by owner " + std::to_string(owner) + " would deadlock");
  }
  return id;
}

bool LockService::is_granted(const std::string& db_name, LockId lockid) const {
  std::lock_guard lock(mutex_);
  const auto q = queues_.find(db_name);
  if (q == queues_.end()) throw Error(ErrorCode::kUnknownLock, db_name);
  const auto it = q->second.nodes.find(lockid);
  if (it == q->second.nodes.end()) throw Error(ErrorCode::kUnknownLock, std::to_string(lockid));
  return it->second.state == LockState::kGranted;
}

void LockService::wait(const std::string& db_name, LockId lockid) {
  std::unique_lock lock(mutex_);
  for (;;) {
    if (shutdown_) throw Error(ErrorCode::kServiceShutdown, "lock service is shut down");
    const auto q = queues_.find(db_name);
    if (q == queues_.end()) throw Error(ErrorCode::kUnknownLock, db_name);
    const auto it = q->second.nodes.find(lockid);
    if (it == q->second.nodes.end()) throw Error(ErrorCode::kUnknownLock, std::to_string(lockid));
    if (it->second.state == LockState::kGranted) return;
    changed_.wait(lock);
  }
}

LockId LockService::request_lock(const std::string& db_name, LockType type, OwnerId owner) {
  const LockId id = enqueue(db_name, type, owner);
  wait(db_name, id);
  return id;
}

void LockService::release_lock(const std::string& db_name, LockId lockid) {
  {
    std::lock_guard lock(mutex_);
    const auto q = queues_.find(db_name);
    if (q == queues_.end()) throw Error(ErrorCode::kUnknownLock, db_name);
    Queue& queue = q->second;
    const auto it = queue.nodes.find(lockid);
    if (it == queue.nodes.end()) throw Error(ErrorCode::kUnknownLock, std::to_string(lockid));
    if (it->second.state != LockState::kGranted) throw Error(ErrorCode::kNotGranted, std::to_string(lockid));
    it->second.state = LockState::kReleased;
    queue.nodes.erase(it);
    // Fire the watches set on the released node. A grant can also stop a node
    // from blocking (a read granted to the owner of a waiting write), so repeat
    // until no watch points at a non-blocker.
    for (bool granted = true; granted;) {
      granted = false;
      for (auto& [id, node] : queue.nodes) {
        if (node.state != LockState::kWaiting) continue;
        const std::vector<LockId> blocking = blockers(queue, node);
        if (node.watching && std::find(blocking.begin(), blocking.end(), *node.watching) != blocking.end()) continue;
        evaluate(queue, node);
        granted = granted || node.state == LockState::kGranted;
      }
    }
  }
  changed_.notify_all();
}

std::vector<LockNode> LockService::snapshot(const std::string& db_name) const {
  std::lock_guard lock(mutex_);
  std::vector<LockNode> out;
  const auto q = queues_.find(db_name);
  if (q == queues_.end()) return out;
  for (const auto& [id, node] : q->second.nodes) out.push_back(node);
  return out;
}

void LockService::shutdown() {
  {
    std::lock_guard lock(mutex_);
    shutdown_ = true;
  }
  changed_.notify_all();
}

}  // namespace wormdb::lock
