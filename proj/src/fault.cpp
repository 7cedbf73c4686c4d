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

#include "wormdb/fault.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>

#include "wormdb/common.hpp"

namespace wormdb {
namespace {

constexpr std::array<std::string_view, 26> kPoints = {
    // meta_dfs remake and truncation
    "meta.remake.after_stage",
    "meta.remake.after_delete",
    "meta.remake.after_create",
    "meta.truncate.after_delete",
    // log-structured recovery over the DFS
    "buffer_flush.before_append",
    "buffer_flush.after_append",
    "before_commit_marker",
    "after_commit_marker",
    "batch.after_flag_set",
    "batch.before_block_remake",
    "batch.after_block_remake",
    "batch.before_log_truncate",
    "batch.after_log_truncate",
    "batch.after_flag_clear",
    "abort.before_truncate",
    "restart.begin",
    "restart.after_redo",
    // baseline flat-file recovery
    "core.write.after_log_write",
    "core.commit.after_log_sync",
    "core.commit.after_flag_set",
    "core.post_commit.after_page_copy",
    "core.post_commit.after_data_sync",
    "core.commit.after_flag_clear",
    "core.commit.after_log_reset",
    "core.restart.after_redo",
    // record engine
    "engine.commit.after_page_flush",
};

}  // namespace

std::span<const std::string_view> FaultInjector::registered_points() noexcept { return kPoints; }

bool FaultInjector::is_registered(std::string_view point) noexcept {
  return std::find(kPoints.begin(), kPoints.end(), point) != kPoints.end();
}

void FaultInjector::arm(std::string_view point, std::uint64_t occurrence, CrashAction action) {
  if (!is_registered(point)) {
    throw Error(ErrorCode::kInvalidArgument, "unregistered fault point '" + std::string(point) + "'");
  }
  if (occurrence == 0) throw Error(ErrorCode::kInvalidArgument, "occurrence must be >= 1");
  std::lock_guard lock(mutex_);
  armed_point_ = std::string(point);
  auto it = hits_.find(point);
  fire_at_ = (it == hits_.end() ? 0 : it->second) + occurrence;
  action_ = action;
}

void FaultInjector::disarm() {
  std::lock_guard lock(mutex_);
  armed_point_.clear();
  fire_at_ = 0;
}

bool FaultInjector::armed() const {
  std::lock_guard lock(mutex_);
  return !armed_point_.empty();
}

void FaultInjector::hit(std::string_view point) {
  std::unique_lock lock(mutex_);
  auto it = hits_.find(point);
  if (it == hits_.end()) it = hits_.emplace(std::string(point), 0).first;
  const std::uint64_t count = ++it->second;
  if (armed_point_.empty() || armed_point_ != point || count != fire_at_) return;
  armed_point_.clear();
  fire_at_ = 0;
  if (action_ == CrashAction::kExitProcess) std::_Exit(kCrashExitCode);
  lock.unlock();
  throw InjectedCrash(std::string(point));
}

std::uint64_t FaultInjector::hits(std::string_view point) const {
  std::lock_guard lock(mutex_);
  auto it = hits_.find(point);
  return it == hits_.end() ? 0 : it->second;
}

std::map<std::string, std::uint64_t> FaultInjector::all_hits() const {
  std::lock_guard lock(mutex_);
  return {hits_.begin(), hits_.end()};
}

void FaultInjector::reset_counts() {
  std::lock_guard lock(mutex_);
  hits_.clear();
  durable_commits_ = 0;
}

void FaultInjector::note_commit_durable() {
  std::lock_guard lock(mutex_);
  ++durable_commits_;
}

std::uint64_t FaultInjector::durable_commits() const {
  std::lock_guard lock(mutex_);
  return durable_commits_;
}

}  // namespace wormdb
