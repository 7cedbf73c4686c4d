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

#include <gtest/gtest.h>

#include <map>

#include "test_util.hpp"
#include "wormdb/fault.hpp"
#include "wormdb/spdu_core.hpp"

namespace wormdb::spdu {
namespace {

using testing::filled;
using testing::pattern;

constexpr std::size_t kP = 128;
constexpr std::size_t kPayload = kP - 16;
constexpr std::uint64_t kPages = 32;

Bytes payload_for(PageId pageid, int version) { return pattern(kPayload, pageid * 1000 + version); }

class SpduCoreTest : public ::testing::Test {
 protected:
  MemPageFile data_{kP, kPages};
  MemPageFile log_{kP};
  SpduCore core_{data_, log_};

  Bytes data_payload(PageId pageid) {
    const Bytes page = data_.read(pageid);
    return Bytes(page.begin() + 16, page.end());
  }
};

TEST_F(SpduCoreTest, FreshLogHoldsOnlyTheMasterPage) {
  EXPECT_EQ(log_.size(), 1u);
  EXPECT_FALSE(core_.master().commit_flag);
  EXPECT_EQ(core_.read_page(5), Bytes(kPayload));
}

TEST_F(SpduCoreTest, LogOffsetsFollowFirstWriteOrder) {
  for (PageId p : {3, 7, 1, 9}) core_.write_page(p, payload_for(p, 0));
  EXPECT_EQ(core_.log_table_index(), (LogTableIndex{{3, 0}, {7, 1}, {1, 2}, {9, 3}}));
  EXPECT_EQ(log_.size(), 5u);

  core_.write_page(3, payload_for(3, 1));
  EXPECT_EQ(core_.log_table_index(), (LogTableIndex{{3, 0}, {7, 1}, {1, 2}, {9, 3}}));
  EXPECT_EQ(log_.size(), 5u);
  EXPECT_EQ(PageFormat::payload(log_.read(1)).size(), kPayload);
  const Bytes log0 = log_.read(1);
  EXPECT_EQ(Bytes(log0.begin() + 16, log0.end()), payload_for(3, 1));

  const Bytes log1 = log_.read(2);
  EXPECT_EQ(PageFormat::header(log1).pageid, 7u);
  EXPECT_EQ(core_.read_page(7), Bytes(log1.begin() + 16, log1.end()));
}

TEST_F(SpduCoreTest, IndexOffsetsPointAtMatchingHeaders) {
  for (int i = 0; i < 40; ++i) core_.write_page((i * 7) % kPages, payload_for(i, i));
  for (const auto& [pageid, offset] : core_.log_table_index()) {
    EXPECT_EQ(PageFormat::header(log_.read(offset + 1)).pageid, pageid);
  }
}

TEST_F(SpduCoreTest, CommitCopiesOnlyLoggedPages) {
  const MemPageFile before = data_;
  for (PageId p : {3, 7, 1, 9}) core_.write_page(p, payload_for(p, 0));
  core_.commit_transaction();
  for (PageId p = 0; p < kPages; ++p) {
    if (p == 1 || p == 3 || p == 7 || p == 9) {
      EXPECT_EQ(data_payload(p), payload_for(p, 0));
    } else {
      EXPECT_EQ(data_.durable_page(p), before.durable_page(p)) << p;
    }
  }
  EXPECT_FALSE(core_.master().commit_flag);
  EXPECT_EQ(log_.size(), 1u);
  EXPECT_TRUE(core_.log_table_index().empty());
}

TEST_F(SpduCoreTest, EmptyCommitCyclesTheFlag) {
  FaultInjector faults;
  SpduCore core(data_, log_, &faults);
  faults.arm("core.commit.after_flag_set");
  EXPECT_THROW(core.commit_transaction(), InjectedCrash);
  EXPECT_TRUE(core.master().commit_flag);
  SpduCore again(data_, log_);
  again.commit_transaction();
  EXPECT_FALSE(again.master().commit_flag);
  for (PageId p = 0; p < kPages; ++p) EXPECT_EQ(data_.read(p), Bytes(kP));
}

TEST_F(SpduCoreTest, PostCommitIsIdempotent) {
  for (PageId p : {3, 7, 1, 9, 3}) core_.write_page(p, payload_for(p, 2));
  core_.post_commit();
  std::vector<Bytes> once;
  for (PageId p = 0; p < kPages; ++p) once.push_back(data_.read(p));
  for (int k = 0; k < 4; ++k) core_.post_commit();
  for (PageId p = 0; p < kPages; ++p) EXPECT_EQ(data_.read(p), once[p]);
}

TEST_F(SpduCoreTest, PostCommitOnEmptyLogIsNoop) {
  core_.post_commit();
  for (PageId p = 0; p < kPages; ++p) EXPECT_EQ(data_.read(p), Bytes(kP));
}

TEST_F(SpduCoreTest, AbortRestoresAndRestartsOffsets) {
  core_.write_page(4, payload_for(4, 0));
  core_.commit_transaction();
  core_.write_page(4, payload_for(4, 1));
  core_.write_page(8, payload_for(8, 1));
  core_.abort_transaction();
  EXPECT_EQ(core_.read_page(4), payload_for(4, 0));
  EXPECT_EQ(core_.read_page(8), Bytes(kPayload));
  EXPECT_TRUE(core_.frames().empty());
  core_.abort_transaction();
  core_.write_page(12, payload_for(12, 0));
  EXPECT_EQ(core_.log_table_index(), (LogTableIndex{{12, 0}}));
}

TEST_F(SpduCoreTest, OutOfRange) {
  EXPECT_THROW(core_.write_page(kPages, payload_for(0, 0)), Error);
  EXPECT_THROW(core_.read_page(kPages), Error);
}

TEST_F(SpduCoreTest, CleanRestartIsNoop) {
  core_.write_page(2, payload_for(2, 0));
  core_.commit_transaction();
  SpduCore restarted(data_, log_);
  EXPECT_EQ(restarted.restart_system(), RecoveryPath::kNone);
  EXPECT_EQ(restarted.read_page(2), payload_for(2, 0));
}

// Crash at every core fault point. The surviving state must equal the
// committed map when the flag became durable, the previous one otherwise.
TEST(SpduCoreCrashTest, EveryPointResolvesToOneSide) {
  const char* points[] = {"core.write.after_log_write",       "core.commit.after_log_sync",
                          "core.commit.after_flag_set",       "core.post_commit.after_page_copy",
                          "core.post_commit.after_data_sync", "core.commit.after_flag_clear",
                          "core.commit.after_log_reset"};
  for (const char* point : points) {
    for (std::uint64_t occurrence : {1, 2}) {
      SCOPED_TRACE(std::string(point) + " #" + std::to_string(occurrence));
      MemPageFile data(kP, kPages);
      MemPageFile log(kP);
      FaultInjector faults;
      std::map<PageId, Bytes> committed;
      {
        SpduCore core(data, log, &faults);
        for (PageId p : {2, 5}) core.write_page(p, payload_for(p, 0));
        core.commit_transaction();
        committed = {{2, payload_for(2, 0)}, {5, payload_for(5, 0)}};
      }
      std::map<PageId, Bytes> next = committed;
      const std::uint64_t durable_before = faults.durable_commits();
      faults.arm(point, occurrence);
      bool crashed = false;
      try {
        SpduCore core(data, log, &faults);
        for (PageId p : {5, 9, 11, 2}) {
          core.write_page(p, payload_for(p, 1));
          next[p] = payload_for(p, 1);
        }
        core.commit_transaction();
      } catch (const InjectedCrash&) {
        crashed = true;
      }
      faults.disarm();
      data.crash();
      log.crash();
      SpduCore restarted(data, log, &faults);
      restarted.restart_system();
      const auto& expected = faults.durable_commits() > durable_before ? next : committed;
      if (!crashed) EXPECT_EQ(&expected, &next);
      for (PageId p = 0; p < kPages; ++p) {
        const auto it = expected.find(p);
        EXPECT_EQ(restarted.read_page(p), it == expected.end() ? Bytes(kPayload) : it->second) << "page " << p;
      }
      EXPECT_FALSE(restarted.master().commit_flag);
    }
  }
}

TEST(SpduCoreCrashTest, CrashDuringRestartIsRecoverable) {
  MemPageFile data(kP, kPages);
  MemPageFile log(kP);
  FaultInjector faults;
  faults.arm("core.post_commit.after_page_copy", 2);
  try {
    SpduCore core(data, log, &faults);
    for (PageId p = 0; p < 6; ++p) core.write_page(p, payload_for(p, 7));
    core.commit_transaction();
    FAIL() << "expected a crash";
  } catch (const InjectedCrash&) {
  }
  for (std::uint64_t occurrence : {1, 3}) {
    data.crash();
    log.crash();
    faults.arm("core.post_commit.after_page_copy", occurrence);
    SpduCore core(data, log, &faults);
    EXPECT_THROW(core.restart_system(), InjectedCrash);
  }
  data.crash();
  log.crash();
  faults.arm("core.restart.after_redo");
  {
    SpduCore core(data, log, &faults);
    EXPECT_THROW(core.restart_system(), InjectedCrash);
  }
  data.crash();
  log.crash();
  SpduCore core(data, log);
  EXPECT_EQ(core.restart_system(), RecoveryPath::kRedo);
  for (PageId p = 0; p < 6; ++p) EXPECT_EQ(core.read_page(p), payload_for(p, 7));
}

TEST(MemPageFileTest, CrashDropsUnsyncedWrites) {
  MemPageFile f(kP, 2);
  f.write(0, filled(kP, 1));
  f.sync();
  f.write(0, filled(kP, 2));
  f.write(2, filled(kP, 3));
  f.crash();
  EXPECT_EQ(f.size(), 2u);
  EXPECT_EQ(f.read(0), filled(kP, 1));
  f.truncate(1);
  f.crash();
  EXPECT_EQ(f.size(), 2u);
}

TEST(MasterPageTest, RoundTripAndChecksum) {
  Bytes page = MasterPage{true, 42}.encode(kP);
  const MasterPage m = MasterPage::decode(page);
  EXPECT_TRUE(m.commit_flag);
  EXPECT_EQ(m.log_page_count, 42u);
  page[9] ^= std::byte{1};
  EXPECT_THROW(MasterPage::decode(page), Error);
}

}  // namespace
}  // namespace wormdb::spdu
