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

#include <sys/wait.h>

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "test_util.hpp"
#include "wormdb/bench.hpp"

namespace wormdb::bench {
namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIoError;
}

BenchConfig small_config() {
  BenchConfig c;
  c.page_size = 1024;
  c.block_size = 16 * 1024;
  c.num_datanodes = 4;
  return c;
}

struct Env {
  explicit Env(BenchConfig c = small_config(), std::uint64_t tuples = 2000)
      : config(c), dfs(c.dfs()), db(dfs, locks, kDatabaseName, suggested_total_pages(tuples, c.page_size), c.engine(),
                                    &faults) {}

  BenchConfig config;
  dfs::Dfs dfs;
  lock::LockService locks;
  FaultInjector faults;
  engine::Database db;
};

TEST(BenchConfigTest, JsonRoundTripAndUnknownKeys) {
  BenchConfig c = small_config();
  c.deferred = false;
  c.post_commit_threshold = 5;
  const BenchConfig back = BenchConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_EQ(back.engine().storage.post_commit_threshold_blocks, 5u);
  EXPECT_FALSE(back.engine().storage.deferred);
  EXPECT_EQ(back.dfs().block_size_bytes, 16u * 1024);
  EXPECT_EQ(code_of([] { BenchConfig::from_json({{"pagesize", 4096}}); }), ErrorCode::kInvalidArgument);
  const BenchConfig partial = BenchConfig::from_json({{"replication", 2}});
  EXPECT_EQ(partial.replication, 2u);
  EXPECT_EQ(partial.page_size, 4096u);
}

TEST(GeneratorTest, DeterministicAndPlantsProbeRows) {
  GenerateOptions o;
  o.tuples = 3000;
  const auto a = generate_rows(o);
  const auto b = generate_rows(o);
  EXPECT_EQ(a, b);
  ASSERT_EQ(a.size(), 3000u);
  o.seed = 43;
  EXPECT_NE(generate_rows(o), a);
  EXPECT_EQ(std::count_if(a.begin(), a.end(), [](const auto& r) { return r.source_ip == kDefaultProbeKey; }), 70);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end(), [](const auto& x, const auto& y) { return x.visit_date < y.visit_date; }));
  for (const auto& r : a) EXPECT_NO_THROW(r.validate());
  EXPECT_GE(a.front().visit_date, engine::parse_date("2000-01-01"));
  EXPECT_LE(a.back().visit_date, engine::parse_date("2000-01-01") + 3650);
}

TEST(GeneratorTest, ProbeCountBoundedByTuples) {
  GenerateOptions o;
  o.tuples = 30;
  EXPECT_EQ(code_of([&] { generate_rows(o); }), ErrorCode::kInvalidArgument);
  o.probe_count = 30;
  const auto rows = generate_rows(o);
  ASSERT_EQ(rows.size(), 30u);
  for (const auto& r : rows) EXPECT_EQ(r.source_ip, kDefaultProbeKey);
  o.tuples = 0;
  o.probe_count = 0;
  EXPECT_TRUE(generate_rows(o).empty());
}

TEST(GeneratorTest, SameSeedGivesIdenticalDataFiles) {
  auto image = [] {
    Env env;
    GenerateOptions o;
    o.tuples = 1500;
    o.commit_every = 400;
    generate(env.db, o);
    env.db.recover();  // drain the log so the data file holds everything
    Bytes all;
    for (std::uint64_t b = 0; b < env.db.files().block_count(env.db.data_file()); ++b) {
      const Bytes block = env.db.files().read_block(env.db.data_file(), b);
      all.insert(all.end(), block.begin(), block.end());
    }
    return all;
  };
  const Bytes first = image();
  EXPECT_FALSE(first.empty());
  EXPECT_EQ(first, image());
}

TEST(BenchRunTest, WorkloadsReportRowsAndCounters) {
  Env env;
  GenerateOptions o;
  o.tuples = 2000;
  const auto gen = generate(env.db, o);
  EXPECT_EQ(gen.records_returned, 2000u);
  EXPECT_EQ(code_of([&] { generate(env.db, o); }), ErrorCode::kAlreadyExists);

  WorkloadSpec scan;
  scan.limit = 500;
  EXPECT_EQ(run(env.db, scan).records_returned, 500u);
  scan.limit = 100000;
  const auto full = run(env.db, scan);
  EXPECT_EQ(full.records_returned, 2000u);
  EXPECT_EQ(full.page_writes, 0u);

  WorkloadSpec sel;
  sel.kind = WorkloadKind::kSelect;
  const auto indexed = run(env.db, sel);
  const auto indexed_again = run(env.db, sel);
  sel.use_index = false;
  const auto scanned = run(env.db, sel);
  EXPECT_EQ(indexed.records_returned, 70u);
  EXPECT_EQ(scanned.records_returned, 70u);
  EXPECT_EQ(indexed.page_reads, indexed_again.page_reads);
  EXPECT_EQ(scanned.page_reads, full.page_reads);
  EXPECT_LT(indexed.page_reads, scanned.page_reads);

  WorkloadSpec ins;
  ins.kind = WorkloadKind::kInsert;
  ins.repeat = 300;
  const auto inserted = run(env.db, ins);
  EXPECT_EQ(inserted.records_returned, 300u);
  EXPECT_EQ(inserted.dfs_remakes, 0u);
  EXPECT_EQ(run(env.db, scan).records_returned, 2300u);

  WorkloadSpec upd;
  upd.kind = WorkloadKind::kUpdate;
  const auto updated = run(env.db, upd);
  EXPECT_GE(updated.records_returned, 70u);
  engine::Session s(env.db);
  s.begin(engine::LockMode::kRead);
  for (const auto& r : s.select_by_key(kDefaultProbeKey, true)) EXPECT_EQ(r.country_code, "ABC");
}

TEST(BenchRunTest, SpecValidation) {
  Env env;
  WorkloadSpec spec;
  spec.crash_point = "nowhere";
  EXPECT_EQ(code_of([&] { spec.validate(); }), ErrorCode::kInvalidArgument);
  spec.crash_point.reset();
  spec.limit = 0;
  EXPECT_EQ(code_of([&] { spec.validate(); }), ErrorCode::kInvalidArgument);
  WorkloadSpec upd;
  upd.kind = WorkloadKind::kUpdate;
  upd.new_country_code = "LONG";
  EXPECT_EQ(code_of([&] { run(env.db, upd); }), ErrorCode::kValueTooLong);
  EXPECT_EQ(parse_workload("select"), WorkloadKind::kSelect);
  EXPECT_EQ(code_of([] { parse_workload("delete"); }), ErrorCode::kInvalidArgument);
}

TEST(BenchRunTest, ReportFormats) {
  MetricsReport r;
  r.operation = "scan";
  r.page_reads = 3;
  const auto j = r.to_json();
  for (const char* key : {"operation", "elapsed_ms", "page_reads", "page_writes", "dfs_remakes", "network_bytes",
                          "records_returned", "recovery_path"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  const auto commas = [](const std::string& s) { return std::count(s.begin(), s.end(), ','); };
  EXPECT_EQ(commas(MetricsReport::csv_header()), commas(r.to_csv()));
  EXPECT_EQ(r.to_csv().rfind("scan,", 0), 0u);
}

TEST(BenchRunTest, CrashedRunRecoversThroughBench) {
  Env env;
  GenerateOptions o;
  o.tuples = 500;
  generate(env.db, o);
  WorkloadSpec ins;
  ins.kind = WorkloadKind::kInsert;
  ins.repeat = 400;
  ins.crash_point = "engine.commit.after_page_flush";
  EXPECT_THROW(run(env.db, ins), InjectedCrash);
  env.faults.disarm();
  EXPECT_TRUE(env.db.needs_recovery());
  const auto rec = recover(env.db);
  EXPECT_EQ(rec.recovery_path, "rollback");
  WorkloadSpec scan;
  EXPECT_EQ(run(env.db, scan).records_returned, 500u);
}

TEST(BenchSoakTest, NoViolations) {
  Env env;
  GenerateOptions o;
  o.tuples = 400;
  generate(env.db, o);
  const auto report = soak(env.db, 4, 15, 7);
  EXPECT_TRUE(report.violations.empty()) << report.violations.front();
  EXPECT_EQ(report.transactions, 60u);
  EXPECT_LE(report.commits + report.aborts, report.transactions);
  EXPECT_GT(report.commits, 0u);
}

// ---- command line ----

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult cli(const std::string& args, const std::filesystem::path& scratch) {
  const auto out_file = scratch / "stdout.txt";
  const std::string cmd = std::string(WORMDB_CLI_PATH) + " " + args + " > " + out_file.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out_file);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

TEST(CliTest, ExitCodesAndReports) {
  testing::TempDir tmp;
  const std::string root = (tmp.path() / "db").string();
  const auto cfg = tmp.path() / "cfg.json";
  std::ofstream(cfg) << R"({"page_size": 1024, "block_size": 16384, "num_datanodes": 4})";

  auto gen = cli("gen --root " + root + " --config " + cfg.string() + " --tuples 1000", tmp.path());
  ASSERT_EQ(gen.code, 0) << gen.out;
  EXPECT_EQ(nlohmann::json::parse(gen.out)["records_returned"], 1000);
  EXPECT_EQ(cli("gen --root " + root + " --tuples 10", tmp.path()).code, 2);
  EXPECT_EQ(cli("run --root " + root + " --config " + cfg.string() + " --workload scan", tmp.path()).code, 2);

  auto sel = cli("run --root " + root + " --workload select --out csv", tmp.path());
  ASSERT_EQ(sel.code, 0) << sel.out;
  EXPECT_NE(sel.out.find("select,"), std::string::npos);
  EXPECT_NE(sel.out.find(",70,none"), std::string::npos);

  EXPECT_EQ(cli("run --root " + root + " --workload bogus", tmp.path()).code, 2);
  EXPECT_EQ(cli("run --root " + root + " --workload update --crash-point nowhere", tmp.path()).code, 2);
  EXPECT_EQ(cli("recover", tmp.path()).code, 2);
  EXPECT_EQ(cli("run --root " + (tmp.path() / "absent").string() + " --workload scan", tmp.path()).code, 2);

  const auto crash = cli("run --root " + root + " --workload insert --repeat 400 --crash-point before_commit_marker",
                         tmp.path());
  EXPECT_EQ(crash.code, kCrashExitCode) << crash.out;
  EXPECT_EQ(cli("run --root " + root + " --workload scan", tmp.path()).code, 2);
  auto rec = cli("recover --root " + root, tmp.path());
  ASSERT_EQ(rec.code, 0) << rec.out;
  EXPECT_EQ(nlohmann::json::parse(rec.out)["recovery_path"], "rollback");
  auto scan = cli("run --root " + root + " --workload scan", tmp.path());
  ASSERT_EQ(scan.code, 0) << scan.out;
  EXPECT_EQ(nlohmann::json::parse(scan.out)["records_returned"], 1000);
}

TEST(CliTest, InMemoryRunsGenerateFirst) {
  testing::TempDir tmp;
  auto r = cli("run --workload select --tuples 800 --no-index", tmp.path());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(nlohmann::json::parse(r.out)["records_returned"], 70);
  EXPECT_EQ(cli("", tmp.path()).code, 2);
}

}  // namespace
}  // namespace wormdb::bench
