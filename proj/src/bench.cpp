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

#include "wormdb/bench.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <set>
#include <random>
#include <sstream>
#include <thread>

namespace wormdb::bench {
namespace {

using engine::UserVisitsRecord;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t pick(std::uint64_t lo, std::uint64_t hi) { return std::uniform_int_distribution<std::uint64_t>(lo, hi)(gen_); }

  std::string word(std::size_t min_len, std::size_t max_len) {
    std::string out(pick(min_len, max_len), 'a');
    for (char& c : out) c = static_cast<char>('a' + pick(0, 25));
    return out;
  }

  template <typename T, std::size_t N>
  const T& choose(const T (&items)[N]) {
    return items[pick(0, N - 1)];
  }

 private:
  std::mt19937_64 gen_;
};

constexpr const char* kUserAgents[] = {
    "Mozilla/5.0 (X11; Linux x86_64)",
    "Mozilla/5.0 (Windows NT 10.0; Win64; x64)",
    "Mozilla/5.0 (Macintosh; Intel Mac OS X 10_15_7)",
    "Opera/9.80 (Windows NT 6.1; U; en)",
    "Lynx/2.8.9rel.1 libwww-FM/2.14",
    "curl/7.81.0",
};
constexpr const char* kCountries[] = {"USA", "GBR", "DEU", "FRA", "JPN", "KOR", "BRA", "IND", "CHN", "CAN"};
constexpr const char* kLanguages[] = {"en-US", "en-GB", "de-DE", "fr-FR", "ja-JP",
                                      "ko-KR", "pt-BR", "hi-IN", "zh-CN", "fr-CA"};

const engine::Date kFirstDate = engine::parse_date("2000-01-01");
constexpr std::uint64_t kDateSpanDays = 3650;
constexpr std::uint64_t kProbeRun = 10;

std::string random_ip(Rng& rng, const std::string& avoid) {
  for (;;) {
    std::string ip = std::to_string(rng.pick(1, 254)) + "." + std::to_string(rng.pick(0, 255)) + "." +
                     std::to_string(rng.pick(0, 255)) + "." + std::to_string(rng.pick(1, 254));
    if (ip != avoid) return ip;
  }
}

UserVisitsRecord make_row(Rng& rng, engine::Date date, const std::string& probe_key) {
  UserVisitsRecord r;
  r.source_ip = random_ip(rng, probe_key);
  r.dest_url = "http://www." + rng.word(5, 15) + ".com/" + rng.word(4, 30) + ".html";
  r.visit_date = date;
  r.ad_revenue = static_cast<float>(rng.pick(0, 99999)) / 100.0f;
  r.user_agent = rng.choose(kUserAgents);
  r.country_code = rng.choose(kCountries);
  r.language_code = rng.choose(kLanguages);
  r.search_word = rng.word(3, 20);
  r.duration = static_cast<std::int32_t>(rng.pick(1, 3600));
  return r;
}

class Meter {
 public:
  explicit Meter(engine::Database& db) : db_(db) {
    db_.files().reset_counters();
    network_before_ = db_.dfs().counters().network_bytes;
    start_ = std::chrono::steady_clock::now();
  }

  MetricsReport finish(std::string operation, const engine::SessionCounters& session) const {
    MetricsReport r;
    r.operation = std::move(operation);
    r.elapsed = std::chrono::steady_clock::now() - start_;
    r.page_reads = session.page_reads;
    r.page_writes = session.page_writes;
    r.dfs_remakes = db_.files().counters(db_.data_file()).remakes + db_.files().counters(db_.log_file()).remakes;
    r.network_bytes = db_.dfs().counters().network_bytes - network_before_;
    return r;
  }

 private:
  engine::Database& db_;
  std::uint64_t network_before_ = 0;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

BenchConfig BenchConfig::from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {"page_size",     "block_size",           "replication",
                                              "num_datanodes", "placement_seed",       "post_commit_threshold",
                                              "deferred",      "latency",              "pool_frames"};
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw Error(ErrorCode::kInvalidArgument, "unknown config key '" + key + "'");
  }
  BenchConfig c;
  try {
    c.page_size = j.value("page_size", c.page_size);
    c.block_size = j.value("block_size", c.block_size);
    c.replication = j.value("replication", c.replication);
    c.num_datanodes = j.value("num_datanodes", c.num_datanodes);
    c.placement_seed = j.value("placement_seed", c.placement_seed);
    c.post_commit_threshold = j.value("post_commit_threshold", c.post_commit_threshold);
    c.deferred = j.value("deferred", c.deferred);
    c.latency_us = j.value("latency", c.latency_us);
    c.pool_frames = j.value("pool_frames", c.pool_frames);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad config value: ") + e.what());
  }
  return c;
}

nlohmann::json BenchConfig::to_json() const {
  return {{"page_size", page_size},
          {"block_size", block_size},
          {"replication", replication},
          {"num_datanodes", num_datanodes},
          {"placement_seed", placement_seed},
          {"post_commit_threshold", post_commit_threshold},
          {"deferred", deferred},
          {"latency", latency_us},
          {"pool_frames", pool_frames}};
}

dfs::DfsConfig BenchConfig::dfs(std::optional<std::filesystem::path> root) const {
  dfs::DfsConfig c;
  c.block_size_bytes = block_size;
  c.replication_factor = replication;
  c.placement_seed = placement_seed;
  c.num_datanodes = num_datanodes;
  c.remote_read_latency = std::chrono::microseconds(latency_us);
  c.root = std::move(root);
  return c;
}

engine::EngineConfig BenchConfig::engine() const {
  engine::EngineConfig c;
  c.page_size = page_size;
  c.storage.post_commit_threshold_blocks = post_commit_threshold;
  c.storage.deferred = deferred;
  c.pool_frames = pool_frames;
  return c;
}

std::vector<UserVisitsRecord> generate_rows(const GenerateOptions& options) {
  if (options.probe_count > options.tuples) {
    throw Error(ErrorCode::kInvalidArgument, "probe_count exceeds the number of tuples");
  }
  Rng rng(options.seed);
  std::vector<engine::Date> dates(options.tuples);
  for (auto& d : dates) d = kFirstDate + static_cast<engine::Date>(rng.pick(0, kDateSpanDays - 1));
  std::sort(dates.begin(), dates.end());
  std::vector<UserVisitsRecord> rows;
  rows.reserve(options.tuples);
  for (engine::Date d : dates) rows.push_back(make_row(rng, d, options.probe_key));

  if (options.probe_count == 0) return rows;
  const std::uint64_t runs = (options.probe_count + kProbeRun - 1) / kProbeRun;
  const std::uint64_t stripe = options.tuples / runs;
  if (stripe < kProbeRun) {
    for (std::uint64_t i = 0; i < options.probe_count; ++i) rows[i].source_ip = options.probe_key;
    return rows;
  }
  for (std::uint64_t run = 0; run < runs; ++run) {
    const std::uint64_t length = std::min(kProbeRun, options.probe_count - run * kProbeRun);
    const std::uint64_t start = run * stripe + rng.pick(0, stripe - length);
    for (std::uint64_t i = start; i < start + length; ++i) rows[i].source_ip = options.probe_key;
  }
  return rows;
}

std::vector<UserVisitsRecord> insert_rows(std::uint64_t count, std::uint64_t seed, const std::string& probe_key) {
  Rng rng(seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<UserVisitsRecord> rows;
  rows.reserve(count);
  const engine::Date start = kFirstDate + static_cast<engine::Date>(kDateSpanDays);
  for (std::uint64_t i = 0; i < count; ++i) {
    rows.push_back(make_row(rng, start + static_cast<engine::Date>(i * 30 / std::max<std::uint64_t>(count, 1)),
                            probe_key));
  }
  return rows;
}

std::uint64_t suggested_total_pages(std::uint64_t tuples, std::uint64_t page_size, std::uint64_t headroom) {
  // Generated rows serialize to at most ~200 bytes; 210 covers the slot entry.
  const std::uint64_t rows = tuples + headroom;
  const std::uint64_t rows_per_page = std::max<std::uint64_t>(1, (page_size - 20) / 210);
  const std::uint64_t heap = (rows + rows_per_page - 1) / rows_per_page;
  const std::uint64_t entries_per_page = engine::IndexPageCodec::entries_per_page(page_size - 16);
  const std::uint64_t index = (rows + entries_per_page - 1) / entries_per_page;
  return std::max((heap + 1) * 8 / 7 + 8, 8 * index + 8);
}

std::string_view workload_name(WorkloadKind kind) noexcept {
  switch (kind) {
    case WorkloadKind::kScan: return "scan";
    case WorkloadKind::kInsert: return "insert";
    case WorkloadKind::kSelect: return "select";
    case WorkloadKind::kUpdate: return "update";
  }
  return "?";
}

WorkloadKind parse_workload(std::string_view name) {
  for (WorkloadKind k : {WorkloadKind::kScan, WorkloadKind::kInsert, WorkloadKind::kSelect, WorkloadKind::kUpdate}) {
    if (workload_name(k) == name) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown workload '" + std::string(name) + "'");
}

void WorkloadSpec::validate() const {
  if (kind == WorkloadKind::kScan && limit == 0) throw Error(ErrorCode::kInvalidArgument, "limit must be positive");
  if (kind == WorkloadKind::kInsert && repeat == 0) throw Error(ErrorCode::kInvalidArgument, "repeat must be positive");
  if (crash_point && !FaultInjector::is_registered(*crash_point)) {
    throw Error(ErrorCode::kInvalidArgument, "unknown fault point '" + *crash_point + "'");
  }
  if (new_country_code.size() > UserVisitsRecord::kMaxCountryCode) {
    throw Error(ErrorCode::kValueTooLong, "countryCode limit is 3 bytes");
  }
}

nlohmann::json MetricsReport::to_json() const {
  return {{"operation", operation},         {"elapsed_ms", elapsed.count()},  {"page_reads", page_reads},
          {"page_writes", page_writes},     {"dfs_remakes", dfs_remakes},     {"network_bytes", network_bytes},
          {"records_returned", records_returned}, {"recovery_path", recovery_path}};
}

std::string MetricsReport::csv_header() {
  return "operation,elapsed_ms,page_reads,page_writes,dfs_remakes,network_bytes,records_returned,recovery_path";
}

std::string MetricsReport::to_csv() const {
  std::ostringstream out;
  out << operation << ',' << elapsed.count() << ',' << page_reads << ',' << page_writes << ',' << dfs_remakes << ','
      << network_bytes << ',' << records_returned << ',' << recovery_path;
  return out.str();
}

MetricsReport generate(engine::Database& db, const GenerateOptions& options) {
  const auto rows = generate_rows(options);
  Meter meter(db);
  engine::Session session(db);
  session.begin(engine::LockMode::kWrite);
  if (session.record_count() != 0) {
    session.abort();
    throw Error(ErrorCode::kAlreadyExists, db.name() + " already holds rows");
  }
  const std::uint64_t chunk = std::max<std::uint64_t>(options.commit_every, 1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (session.lock_mode() == engine::LockMode::kNone) session.begin(engine::LockMode::kWrite);
    session.insert_record(rows[i]);
    if ((i + 1) % chunk == 0) session.commit();
  }
  if (session.lock_mode() != engine::LockMode::kNone) session.commit();
  MetricsReport report = meter.finish("gen", session.counters());
  report.records_returned = rows.size();
  return report;
}

MetricsReport run(engine::Database& db, const WorkloadSpec& spec) {
  spec.validate();
  if (spec.crash_point) {
    if (db.faults() == nullptr) throw Error(ErrorCode::kInvalidArgument, "crash point needs a fault injector");
    db.faults()->arm(*spec.crash_point, 1, spec.crash_action);
  }
  Meter meter(db);
  engine::Session session(db);
  const bool writes = spec.kind == WorkloadKind::kInsert || spec.kind == WorkloadKind::kUpdate;
  session.begin(writes ? engine::LockMode::kWrite : engine::LockMode::kRead);
  session.reset_counters();
  std::uint64_t returned = 0;
  switch (spec.kind) {
    case WorkloadKind::kScan:
      returned = session.scan(spec.limit).size();
      session.release();
      break;
    case WorkloadKind::kSelect:
      returned = session.select_by_key(spec.key, spec.use_index).size();
      session.release();
      break;
    case WorkloadKind::kInsert:
      for (const auto& row : insert_rows(spec.repeat, spec.seed, spec.key)) session.insert_record(row);
      returned = spec.repeat;
      session.commit();
      break;
    case WorkloadKind::kUpdate:
      returned = session.update_by_key(spec.key, spec.new_country_code, spec.use_index);
      session.commit();
      break;
  }
  MetricsReport report = meter.finish(std::string(workload_name(spec.kind)), session.counters());
  report.records_returned = returned;
  return report;
}

MetricsReport recover(engine::Database& db) {
  Meter meter(db);
  const spdu::RecoveryPath path = db.recover();
  MetricsReport report = meter.finish("recover", {});
  report.recovery_path = std::string(spdu::recovery_path_name(path));
  return report;
}

nlohmann::json SoakReport::to_json() const {
  return {{"sessions", sessions}, {"transactions", transactions}, {"commits", commits},
          {"aborts", aborts},     {"committed_inserts", committed_inserts}, {"violations", violations}};
}

SoakReport soak(engine::Database& db, std::uint64_t sessions, std::uint64_t transactions_per_session,
                std::uint64_t seed, const std::string& probe_key) {
  SoakReport report;
  report.sessions = sessions;
  std::uint64_t initial = 0;
  {
    engine::Session s(db);
    s.begin(engine::LockMode::kRead);
    initial = s.record_count();
    s.release();
  }
  std::mutex mutex;
  std::atomic<std::uint64_t> commits{0}, aborts{0}, inserted{0};
  auto violation = [&](std::string what) {
    std::lock_guard lock(mutex);
    report.violations.push_back(std::move(what));
  };
  auto worker = [&](std::uint64_t id) {
    Rng rng(seed * 1000003 + id);
    engine::Session s(db);
    for (std::uint64_t t = 0; t < transactions_per_session; ++t) {
      try {
        if (rng.pick(0, 9) < 4) {
          s.begin(engine::LockMode::kRead);
          const auto indexed = s.select_by_key(probe_key, true);
          const auto scanned = s.select_by_key(probe_key, false);
          if (indexed != scanned) violation("session " + std::to_string(id) + ": index and scan disagree");
          s.release();
          continue;
        }
        s.begin(engine::LockMode::kWrite);
        const std::uint64_t before = s.record_count();
        const std::uint64_t n = rng.pick(0, 4);
        for (std::uint64_t i = 0; i < n; ++i) {
          s.insert_record(make_row(rng, kFirstDate + static_cast<engine::Date>(kDateSpanDays + t), probe_key));
        }
        if (rng.pick(0, 3) == 0) {
          const char* codes[] = {"AAA", "BBB", "CCC"};
          s.update_by_key(probe_key, rng.choose(codes), rng.pick(0, 1) == 1);
        }
        if (s.record_count() != before + n) violation("session " + std::to_string(id) + ": row count drifted");
        if (rng.pick(0, 4) == 0) {
          s.abort();
          ++aborts;
        } else {
          s.commit();
          ++commits;
          inserted += n;
        }
      } catch (const std::exception& e) {
        violation("session " + std::to_string(id) + ": " + e.what());
        if (s.lock_mode() != engine::LockMode::kNone) s.release();
      }
    }
  };
  std::vector<std::thread> threads;
  for (std::uint64_t i = 0; i < sessions; ++i) threads.emplace_back(worker, i);
  for (auto& t : threads) t.join();

  report.transactions = sessions * transactions_per_session;
  report.commits = commits;
  report.aborts = aborts;
  report.committed_inserts = inserted;
  engine::Session s(db);
  s.begin(engine::LockMode::kRead);
  if (s.record_count() != initial + inserted) violation("final row count does not match committed inserts");
  if (s.scan_keys() != s.index_entries()) violation("index and table differ after the soak");
  if (s.select_by_key(probe_key, true) != s.select_by_key(probe_key, false)) {
    violation("probe select differs between index and scan");
  }
  s.release();
  return report;
}

}  // namespace wormdb::bench
