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

// wormdb_cli: generate a UserVisits database on the simulated DFS, run the
// scan/insert/select/update workloads, inject crashes and recover.
//
// Exit codes: 0 success, 1 storage or workload failure, 2 bad arguments or
// precondition (missing database, recovery needed, ...), 42 injected crash.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wormdb/bench.hpp"
#include "wormdb/database.hpp"
#include "wormdb/dfs.hpp"
#include "wormdb/fault.hpp"
#include "wormdb/lock_service.hpp"

namespace fs = std::filesystem;
using namespace wormdb;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitPrecondition = 2;

struct Options {
  std::string root;
  std::string config_file;
  std::string out = "json";

  std::uint64_t tuples = 100000;
  std::uint64_t seed = 42;
  std::string key = bench::kDefaultProbeKey;
  std::uint64_t probe_count = 70;
  std::uint64_t pages = 0;
  std::uint64_t commit_every = 10000;

  std::string workload = "scan";
  std::uint64_t limit = 100000;
  std::uint64_t repeat = 10000;
  bool use_index = true;
  std::string crash_point;
  std::uint64_t repeat_runs = 1;

  std::uint64_t sessions = 8;
  std::uint64_t transactions = 100;
};

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
}

void emit(const Options& o, const std::vector<bench::MetricsReport>& reports) {
  if (o.out == "csv") {
    std::cout << bench::MetricsReport::csv_header() << '\n';
    for (const auto& r : reports) std::cout << r.to_csv() << '\n';
    return;
  }
  if (reports.size() == 1) {
    std::cout << reports.front().to_json().dump(2) << '\n';
    return;
  }
  nlohmann::json all = nlohmann::json::array();
  for (const auto& r : reports) all.push_back(r.to_json());
  std::cout << all.dump(2) << '\n';
}

/// DFS, lock service and database for one command. Without --root everything
/// lives in memory and is generated fresh first.
class Environment {
 public:
  Environment(const Options& o, bool generating, engine::OpenMode mode) {
    const bool persistent = !o.root.empty();
    const fs::path config_path = fs::path(o.root) / "config.json";
    if (persistent && !generating) {
      if (!fs::exists(config_path)) throw Error(ErrorCode::kNotFound, "no database under " + o.root + "; run gen first");
      if (!o.config_file.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "--config applies at gen; " + o.root + " already has one");
      }
      config_ = bench::BenchConfig::from_json(read_json(config_path));
    } else if (!o.config_file.empty()) {
      config_ = bench::BenchConfig::from_json(read_json(o.config_file));
    }
    std::optional<fs::path> dfs_root;
    if (persistent) {
      if (generating && fs::exists(config_path)) {
        throw Error(ErrorCode::kAlreadyExists, o.root + " already holds a database");
      }
      fs::create_directories(o.root);
      dfs_root = fs::path(o.root) / "dfs";
    }
    dfs_.emplace(config_.dfs(dfs_root));
    const bool exists = engine::Database::exists(*dfs_, bench::kDatabaseName);
    if (persistent && !generating && !exists) throw Error(ErrorCode::kNotFound, "database files are missing");
    fresh_ = !exists;
    const std::uint64_t pages =
        o.pages != 0 ? o.pages : bench::suggested_total_pages(o.tuples, config_.page_size);
    db_.emplace(*dfs_, locks_, bench::kDatabaseName, pages, config_.engine(), &faults_, mode);
    if (persistent && generating) write_json(config_path, config_.to_json());
  }

  engine::Database& db() { return *db_; }
  bool fresh() const { return fresh_; }

 private:
  bench::BenchConfig config_;
  lock::LockService locks_;
  FaultInjector faults_;
  std::optional<dfs::Dfs> dfs_;
  std::optional<engine::Database> db_;
  bool fresh_ = false;
};

bench::GenerateOptions gen_options(const Options& o) {
  bench::GenerateOptions g;
  g.tuples = o.tuples;
  g.seed = o.seed;
  g.probe_key = o.key;
  g.probe_count = o.probe_count;
  g.commit_every = o.commit_every;
  return g;
}

int cmd_gen(const Options& o) {
  Environment env(o, true, engine::OpenMode::kRequireClean);
  emit(o, {bench::generate(env.db(), gen_options(o))});
  return 0;
}

int cmd_run(const Options& o) {
  bench::WorkloadSpec spec;
  spec.kind = bench::parse_workload(o.workload);
  spec.limit = o.limit;
  spec.repeat = o.repeat;
  spec.key = o.key;
  spec.use_index = o.use_index;
  spec.seed = o.seed;
  if (!o.crash_point.empty()) spec.crash_point = o.crash_point;
  spec.crash_action = CrashAction::kExitProcess;
  spec.validate();
  if (o.repeat_runs == 0) throw Error(ErrorCode::kInvalidArgument, "--repeat-runs must be positive");

  Environment env(o, o.root.empty(), engine::OpenMode::kRequireClean);
  if (env.fresh()) bench::generate(env.db(), gen_options(o));
  std::vector<bench::MetricsReport> reports;
  for (std::uint64_t i = 0; i < o.repeat_runs; ++i) {
    bench::WorkloadSpec one = spec;
    one.seed = spec.seed + i;
    if (i > 0) one.crash_point.reset();
    reports.push_back(bench::run(env.db(), one));
  }
  emit(o, reports);
  return 0;
}

int cmd_recover(const Options& o) {
  if (o.root.empty()) throw Error(ErrorCode::kInvalidArgument, "recover needs --root");
  Environment env(o, false, engine::OpenMode::kManual);
  emit(o, {bench::recover(env.db())});
  return 0;
}

int cmd_soak(const Options& o) {
  Environment env(o, o.root.empty(), engine::OpenMode::kRequireClean);
  if (env.fresh()) bench::generate(env.db(), gen_options(o));
  const bench::SoakReport report = bench::soak(env.db(), o.sessions, o.transactions, o.seed, o.key);
  std::cout << report.to_json().dump(2) << '\n';
  return report.violations.empty() ? 0 : kExitFailure;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kNotFound:
    case ErrorCode::kAlreadyExists:
    case ErrorCode::kRecoveryNeeded:
    case ErrorCode::kValueTooLong:
      return kExitPrecondition;
    default:
      return kExitFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wormdb: page store with shadow-page deferred-update recovery on a write-once DFS"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--root", o.root, "Directory holding the persistent DFS (in-memory when omitted)");
  app.add_option("--config", o.config_file, "JSON config: page_size, block_size, replication, post_commit_threshold, "
                                            "deferred, latency");
  app.add_option("--out", o.out, "Report format")->check(CLI::IsMember({"json", "csv"}));

  auto add_data_flags = [&](CLI::App* sub) {
    sub->add_option("--tuples", o.tuples, "Rows to generate");
    sub->add_option("--seed", o.seed, "Generator seed");
    sub->add_option("--key", o.key, "Probe sourceIP");
    sub->add_option("--probe-count", o.probe_count, "Rows carrying the probe key");
    sub->add_option("--pages", o.pages, "Database size in pages (derived from --tuples when 0)");
    sub->add_option("--commit-every", o.commit_every, "Rows per load transaction")->check(CLI::PositiveNumber);
  };

  CLI::App* gen = app.add_subcommand("gen", "Create and load a database");
  add_data_flags(gen);

  CLI::App* run = app.add_subcommand("run", "Run one workload in a cold session");
  add_data_flags(run);
  run->add_option("--workload", o.workload, "scan | insert | select | update")
      ->check(CLI::IsMember({"scan", "insert", "select", "update"}));
  run->add_option("--limit", o.limit, "Scan row limit");
  run->add_option("--repeat", o.repeat, "Insert count");
  run->add_flag("--index,!--no-index", o.use_index, "Use the sourceIP index for select/update");
  run->add_option("--crash-point", o.crash_point, "Exit with code 42 at this fault point");
  run->add_option("--repeat-runs", o.repeat_runs, "Cold runs to report");

  CLI::App* recover = app.add_subcommand("recover", "Run restart processing on a crashed database");

  CLI::App* soak = app.add_subcommand("soak", "Concurrent sessions with consistency checks");
  add_data_flags(soak);
  soak->add_option("--sessions", o.sessions, "Concurrent sessions")->check(CLI::PositiveNumber);
  soak->add_option("--repeat", o.transactions, "Transactions per session");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitPrecondition;
  }

  try {
    if (*gen) return cmd_gen(o);
    if (*run) return cmd_run(o);
    if (*recover) return cmd_recover(o);
    if (*soak) return cmd_soak(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
