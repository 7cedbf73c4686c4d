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
#include "wormdb/dfs.hpp"
#include "wormdb/fault.hpp"
#include "wormdb/meta_dfs.hpp"
#include "wormdb/spdu_dfs.hpp"

namespace wormdb::spdu {
namespace {

using testing::pattern;

constexpr std::uint64_t kP = 256;
constexpr std::uint64_t kN = 16;
constexpr std::size_t kPayload = kP - 16;
constexpr std::uint64_t kPages = 64;

Bytes payload_for(PageId pageid, int version) { return pattern(kPayload, pageid * 1000 + version); }

Bytes format_payload(const Bytes& page) { return Bytes(page.begin() + 16, page.end()); }

dfs::DfsConfig small_dfs() {
  dfs::DfsConfig c;
  c.block_size_bytes = kP * kN;
  c.num_datanodes = 4;
  return c;
}

class SpduDfsTest : public ::testing::Test {
 protected:
  SpduDfsTest() { SpduDfs::create(files_, "db/data", "db/log", kPages); }

  SpduDfs session(SpduDfsConfig config = {}) { return SpduDfs(files_, "db/data", "db/log", config, &faults_); }
  std::uint64_t log_blocks() { return files_.refresh("db/log"); }
  std::uint64_t data_remakes() { return files_.counters("db/data").remakes; }

  dfs::Dfs dfs_{small_dfs()};
  FaultInjector faults_;
  meta::MetaDfsManager files_{dfs_, {kP, kN}, &faults_};
};

TEST(LogBlockFooterTest, RoundTripAndLayout) {
  LogBlockFooter f{{5, 3, 9}, true};
  const Bytes page = f.encode(kP);
  ASSERT_EQ(page.size(), kP);
  EXPECT_EQ(load_le<std::uint32_t>(page, 0), 3u);
  EXPECT_EQ(page[4], std::byte{1});
  EXPECT_EQ(load_le<std::uint64_t>(page, 13), 5u);
  EXPECT_EQ(load_le<std::uint64_t>(page, 21), 3u);
  EXPECT_EQ(load_le<std::uint64_t>(page, 29), 9u);
  const LogBlockFooter back = LogBlockFooter::decode(page);
  EXPECT_EQ(back.pageids, f.pageids);
  EXPECT_TRUE(back.commit_complete);
  EXPECT_EQ(LogBlockFooter::capacity(4096), 510u);
}

TEST(LogBlockFooterTest, ChecksumCoversEveryField) {
  const Bytes page = LogBlockFooter{{5, 3, 9}, false}.encode(kP);
  for (std::size_t at : {0u, 4u, 5u, 13u, 30u}) {
    Bytes bad = page;
    bad[at] ^= std::byte{0x40};
    EXPECT_THROW(LogBlockFooter::decode(bad), Error) << at;
  }
}

TEST(MasterBlockTest, RoundTrip) {
  const Bytes block = MasterBlock{true, 7}.encode(kP, kN);
  EXPECT_EQ(block.size(), kP * kN);
  const MasterBlock m = MasterBlock::decode(ByteSpan(block).first(kP));
  EXPECT_TRUE(m.commit_flag);
  EXPECT_EQ(m.batch_block_count, 7u);
}

TEST_F(SpduDfsTest, CreateLaysOutDataAndMaster) {
  EXPECT_EQ(files_.block_count("db/data"), kPages / kN);
  EXPECT_EQ(log_blocks(), 1u);
  SpduDfs s = session();
  EXPECT_FALSE(s.read_master().commit_flag);
  EXPECT_EQ(s.read_page(10), Bytes(kPayload));
}

TEST_F(SpduDfsTest, BufferAutoFlushesAtNMinusOne) {
  SpduDfs s = session();
  for (PageId p = 0; p < kN - 2; ++p) s.write_page(p, payload_for(p, 0));
  EXPECT_EQ(log_blocks(), 1u);
  s.write_page(kN - 2, payload_for(kN - 2, 0));
  EXPECT_EQ(log_blocks(), 2u);
  EXPECT_TRUE(s.buffer().empty());
  s.write_page(kN - 1, payload_for(kN - 1, 0));
  EXPECT_EQ(s.buffer().size(), 1u);
  const auto footers = s.read_footers();
  ASSERT_EQ(footers.size(), 1u);
  EXPECT_EQ(footers[0].page_count(), kN - 1);
  EXPECT_FALSE(footers[0].commit_complete);
}

TEST_F(SpduDfsTest, RewriteInBufferKeepsOneSlot) {
  SpduDfs s = session();
  s.write_page(5, payload_for(5, 0));
  s.write_page(5, payload_for(5, 1));
  EXPECT_EQ(s.buffer().size(), 1u);
  EXPECT_EQ(s.read_page(5), payload_for(5, 1));
}

TEST_F(SpduDfsTest, RewriteAfterFlushAppendsNewVersion) {
  SpduDfs s = session();
  s.write_page(5, payload_for(5, 0));
  s.flush_buffer(false);
  s.write_page(5, payload_for(5, 1));
  s.flush_buffer(false);
  EXPECT_EQ(s.log_table_index().at(5), (LogSlot{2, 0}));
  EXPECT_EQ(s.read_page(5), payload_for(5, 1));
}

TEST_F(SpduDfsTest, ReadLookupOrder) {
  SpduDfs s = session();
  for (PageId p : {1, 2, 3}) s.write_page(p, payload_for(p, 0));
  const auto block = s.flush_buffer(false);
  s.write_page(3, payload_for(3, 1));
  s.reset_counters();
  EXPECT_EQ(s.read_page(3), payload_for(3, 1));
  EXPECT_EQ(s.read_page(2), payload_for(2, 0));
  EXPECT_EQ(s.read_page(40), Bytes(kPayload));
  EXPECT_EQ(s.counters().buffer_hits, 1u);
  EXPECT_EQ(s.counters().log_page_reads, 1u);
  EXPECT_EQ(s.counters().data_page_reads, 1u);
  EXPECT_EQ(s.log_table_index().at(2), (LogSlot{*block, 1}));
}

TEST_F(SpduDfsTest, FlushWritesFooterInArrivalOrder) {
  SpduDfs s = session();
  for (PageId p : {5, 3, 9}) s.write_page(p, payload_for(p, 0));
  EXPECT_EQ(s.flush_buffer(false), 1u);
  const auto footers = s.read_footers();
  EXPECT_EQ(footers[0].pageids, (std::vector<PageId>{5, 3, 9}));
  s.write_page(7, payload_for(7, 0));
  EXPECT_EQ(s.flush_buffer(false), 2u);
  EXPECT_EQ(s.flush_buffer(false), std::nullopt);
}

TEST_F(SpduDfsTest, FooterPageidsMatchPageHeaders) {
  SpduDfs s = session();
  for (int i = 0; i < 50; ++i) s.write_page((i * 11) % kPages, payload_for(i, i));
  s.commit_transaction();
  for (std::uint64_t b = 1; b < log_blocks(); ++b) {
    const auto footer = s.read_footers()[b - 1];
    for (std::size_t slot = 0; slot < footer.page_count(); ++slot) {
      EXPECT_EQ(PageFormat::header(files_.read_page_at("db/log", {b, slot})).pageid, footer.pageids[slot]);
    }
  }
}

TEST_F(SpduDfsTest, EmptyCommitAppendsMarkerBlock) {
  SpduDfs s = session();
  s.commit_transaction();
  ASSERT_EQ(log_blocks(), 2u);
  const auto footer = s.read_footers().back();
  EXPECT_EQ(footer.page_count(), 0u);
  EXPECT_TRUE(footer.commit_complete);
}

TEST_F(SpduDfsTest, OtherSessionSeesCommittedPagesFromFootersOnly) {
  {
    SpduDfs p1 = session();
    p1.on_lock_acquired(true);
    p1.write_page(5, payload_for(5, 0));
    p1.write_page(3, payload_for(3, 0));
    p1.commit_transaction();
    const auto footer = p1.read_footers().back();
    EXPECT_EQ(footer.pageids, (std::vector<PageId>{5, 3}));
    EXPECT_TRUE(footer.commit_complete);
  }
  SpduDfs p2 = session();
  files_.reset_counters();
  dfs_.reset_counters();
  p2.reconstruct_log_table_index();
  EXPECT_EQ(p2.log_table_index(), (DfsLogTableIndex{{5, {1, 0}}, {3, {1, 1}}}));
  EXPECT_EQ(files_.counters("db/log").block_reads, 0u);
  EXPECT_EQ(files_.counters("db/log").page_reads, log_blocks() - 1);
  EXPECT_EQ(dfs_.counters().network_bytes, (log_blocks() - 1) * kP);
  EXPECT_EQ(p2.read_page(5), payload_for(5, 0));
}

TEST_F(SpduDfsTest, EmptyLogGivesEmptyIndex) {
  SpduDfs s = session();
  EXPECT_TRUE(s.reconstruct_log_table_index().empty());
}

TEST_F(SpduDfsTest, ReconstructionLastWins) {
  SpduDfs s = session();
  s.write_page(5, payload_for(5, 0));
  s.commit_transaction();
  s.write_page(6, payload_for(6, 0));
  s.commit_transaction();
  s.write_page(7, payload_for(7, 0));
  s.commit_transaction();
  s.write_page(5, payload_for(5, 1));
  s.commit_transaction();
  SpduDfs other = session();
  EXPECT_EQ(other.reconstruct_log_table_index().at(5), (LogSlot{4, 0}));
  EXPECT_EQ(other.read_page(5), payload_for(5, 1));
}

TEST_F(SpduDfsTest, ReconstructionSkipsUncommittedTail) {
  SpduDfs s = session();
  s.write_page(5, payload_for(5, 0));
  s.commit_transaction();
  for (PageId p = 0; p < kN - 1; ++p) s.write_page(p, payload_for(p, 9));
  ASSERT_EQ(log_blocks(), 3u);
  SpduDfs other = session();
  other.reconstruct_log_table_index();
  EXPECT_EQ(other.committed_blocks(), 1u);
  EXPECT_EQ(other.read_page(5), payload_for(5, 0));
  EXPECT_EQ(other.read_page(0), Bytes(kPayload));
}

TEST_F(SpduDfsTest, DeferredCommitsDoNotRemakeData) {
  SpduDfs s = session();
  files_.reset_counters();
  s.write_page(1, payload_for(1, 0));
  s.commit_transaction();
  s.write_page(2, payload_for(2, 0));
  s.commit_transaction();
  EXPECT_EQ(data_remakes(), 0u);
  EXPECT_EQ(log_blocks(), 3u);
}

TEST_F(SpduDfsTest, ThresholdTriggersBatch) {
  SpduDfs s = session({.post_commit_threshold_blocks = 3, .deferred = true});
  for (int i = 0; i < 3; ++i) {
    s.write_page(i, payload_for(i, 0));
    s.commit_transaction();
  }
  EXPECT_EQ(log_blocks(), 4u);
  s.write_page(40, payload_for(40, 0));
  s.commit_transaction();
  EXPECT_EQ(log_blocks(), 1u);
  EXPECT_TRUE(s.log_table_index().empty());
  EXPECT_EQ(s.counters().batches, 1u);
  for (PageId p : {0, 1, 2, 40}) {
    EXPECT_EQ(format_payload(files_.read_page("db/data", p)), payload_for(p, 0));
  }
}

TEST_F(SpduDfsTest, NonDeferredBatchesEveryCommit) {
  SpduDfs s = session({.post_commit_threshold_blocks = 64, .deferred = false});
  s.write_page(9, payload_for(9, 0));
  s.commit_transaction();
  EXPECT_EQ(log_blocks(), 1u);
  EXPECT_EQ(s.read_page(9), payload_for(9, 0));
}

TEST_F(SpduDfsTest, BatchRemakesEachTouchedBlockOnce) {
  SpduDfs s = session();
  for (PageId p : {3, 7, 1, 9}) s.write_page(p, payload_for(p, 0));
  s.commit_transaction();
  files_.reset_counters();
  s.batch_post_commit();
  EXPECT_EQ(data_remakes(), 1u);

  for (PageId p : {0, 17, 18, 33, 63, 62, 20}) s.write_page(p, payload_for(p, 1));
  s.commit_transaction();
  files_.reset_counters();
  s.batch_post_commit();
  EXPECT_EQ(data_remakes(), 4u);
}

TEST_F(SpduDfsTest, BatchKeepsNewestVersion) {
  SpduDfs s = session();
  s.write_page(5, payload_for(5, 0));
  s.commit_transaction();
  s.write_page(5, payload_for(5, 1));
  s.commit_transaction();
  s.batch_post_commit();
  EXPECT_EQ(s.read_page(5), payload_for(5, 1));
}

TEST_F(SpduDfsTest, ApplyIsIdempotent) {
  SpduDfs s = session();
  for (int i = 0; i < 40; ++i) s.write_page((i * 13) % kPages, payload_for(i, i));
  s.commit_transaction();
  s.apply_committed_log();
  std::vector<Bytes> once;
  for (std::uint64_t b = 0; b < kPages / kN; ++b) once.push_back(files_.read_block("db/data", b));
  for (int k = 0; k < 4; ++k) {
    s.apply_committed_log();
    for (std::uint64_t b = 0; b < kPages / kN; ++b) EXPECT_EQ(files_.read_block("db/data", b), once[b]);
  }
}

TEST_F(SpduDfsTest, BatchNeedsCommittedLog) {
  SpduDfs s = session();
  s.write_page(1, payload_for(1, 0));
  EXPECT_THROW(s.batch_post_commit(), Error);
}

TEST_F(SpduDfsTest, AbortTruncatesToNewestCommittedBlock) {
  SpduDfs s = session();
  for (PageId p = 0; p < kN - 1; ++p) s.write_page(p, payload_for(p, 0));
  s.commit_transaction();
  ASSERT_EQ(log_blocks(), 3u);
  for (PageId p = 20; p < 20 + 2 * (kN - 1); ++p) s.write_page(p, payload_for(p, 1));
  ASSERT_EQ(log_blocks(), 5u);
  s.write_page(1, payload_for(1, 1));
  s.abort_transaction();
  EXPECT_EQ(log_blocks(), 3u);
  EXPECT_EQ(s.read_page(1), payload_for(1, 0));
  EXPECT_EQ(s.read_page(25), Bytes(kPayload));
}

TEST_F(SpduDfsTest, AbortWithOnlyBufferedWrites) {
  SpduDfs s = session();
  s.write_page(4, payload_for(4, 0));
  s.abort_transaction();
  EXPECT_EQ(log_blocks(), 1u);
  EXPECT_EQ(s.read_page(4), Bytes(kPayload));
}

TEST_F(SpduDfsTest, RestartDropsUncommittedTail) {
  {
    SpduDfs s = session();
    for (PageId p = 0; p < kN - 1; ++p) s.write_page(p, payload_for(p, 0));
  }
  EXPECT_EQ(log_blocks(), 2u);
  SpduDfs s = session();
  EXPECT_TRUE(s.needs_recovery());
  EXPECT_EQ(s.restart_system(), RecoveryPath::kRollback);
  EXPECT_EQ(log_blocks(), 1u);
  EXPECT_EQ(s.restart_system(), RecoveryPath::kNone);
}

TEST_F(SpduDfsTest, ReaderRefusesInterruptedBatchWriterRecovers) {
  {
    SpduDfs s = session();
    s.write_page(3, payload_for(3, 0));
    s.commit_transaction();
    faults_.arm("batch.after_block_remake");
    EXPECT_THROW(s.batch_post_commit(), InjectedCrash);
  }
  SpduDfs reader = session();
  try {
    reader.on_lock_acquired(false);
    FAIL() << "reader should not recover";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRecoveryNeeded);
  }
  SpduDfs writer = session();
  writer.on_lock_acquired(true);
  EXPECT_FALSE(writer.read_master().commit_flag);
  EXPECT_EQ(log_blocks(), 1u);
  EXPECT_EQ(writer.read_page(3), payload_for(3, 0));
}

TEST_F(SpduDfsTest, CorruptFooterSurfaces) {
  SpduDfs s = session();
  s.write_page(3, payload_for(3, 0));
  s.commit_transaction();
  Bytes block = files_.read_block("db/log", 1);
  block[(kN - 1) * kP + 14] ^= std::byte{1};
  files_.overwrite_block("db/log", 1, block);
  SpduDfs other = session();
  EXPECT_THROW(other.reconstruct_log_table_index(), Error);
}

TEST_F(SpduDfsTest, OutOfRange) {
  SpduDfs s = session();
  EXPECT_THROW(s.write_page(kPages, payload_for(0, 0)), Error);
  EXPECT_THROW(s.read_page(kPages), Error);
}

}  // namespace
}  // namespace wormdb::spdu
