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

#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <string_view>

namespace wormdb {

/// Thrown at an armed fault point. Deliberately not derived from Error so that
/// storage-level error handling never swallows a simulated crash.
class InjectedCrash : public std::exception {
 public:
  explicit InjectedCrash(std::string point) : point_(std::move(point)), what_("injected crash at " + point_) {}

  const char* what() const noexcept override { return what_.c_str(); }
  const std::string& point() const noexcept { return point_; }

 private:
  std::string point_;
  std::string what_;
};

enum class CrashAction {
  kThrow,        // raise InjectedCrash (in-process crash simulation)
  kExitProcess,  // std::_Exit(kCrashExitCode) (CLI crash runs)
};

inline constexpr int kCrashExitCode = 42;

/// Named crash sites compiled into every durability-relevant step of the
/// storage stack. Hits are counted per point; one point at a time can be armed
/// to fire on its n-th hit.
class FaultInjector {
 public:
  static std::span<const std::string_view> registered_points() noexcept;
  static bool is_registered(std::string_view point) noexcept;

  /// Arms `point` to fire on its `occurrence`-th hit counted from now.
  void arm(std::string_view point, std::uint64_t occurrence = 1, CrashAction action = CrashAction::kThrow);
  void disarm();
  bool armed() const;

  void hit(std::string_view point);

  std::uint64_t hits(std::string_view point) const;
  std::map<std::string, std::uint64_t> all_hits() const;
  void reset_counts();

  /// Set by the commit path the instant a commit marker became durable.
  void note_commit_durable();
  std::uint64_t durable_commits() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::uint64_t, std::less<>> hits_;
  std::string armed_point_;
  std::uint64_t fire_at_ = 0;
  CrashAction action_ = CrashAction::kThrow;
  std::uint64_t durable_commits_ = 0;
};

inline void fault_point(FaultInjector* injector, std::string_view point) {
  if (injector != nullptr) injector->hit(point);
}

}  // namespace wormdb
