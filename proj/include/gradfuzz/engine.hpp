// Copyright 2026 The gradfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// The fuzzing loop.
//
// Every seed is run once with taint tracking; each conditional direction on
// its path that no run has taken yet enters the branch ledger together with
// the input that reached the statement. The loop then repeatedly selects an
// unexplored branch and searches for an input that takes it: by growing the
// input when the predicate depends on how many bytes a read returned, by
// gradient descent over the tainted bytes, or by random havoc when the
// predicate carries no taint. Every candidate runs without taint tracking;
// only candidates that reach a new coverage state are admitted to the corpus
// and taint-tracked, which adds their own unexplored branches to the ledger.

#ifndef GRADFUZZ_ENGINE_HPP_
#define GRADFUZZ_ENGINE_HPP_

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gradfuzz/constraints.hpp"
#include "gradfuzz/coverage.hpp"
#include "gradfuzz/harness.hpp"
#include "gradfuzz/input_buffer.hpp"
#include "gradfuzz/length_explore.hpp"
#include "gradfuzz/mutator.hpp"
#include "gradfuzz/search.hpp"

namespace gradfuzz {

struct EngineConfig {
  uint64_t max_execs = 0;    // fast executions; 0 = unlimited
  double max_seconds = 0;    // wall clock; 0 = unlimited
  uint64_t branch_budget = 4096;  // executions per branch selection
  SearchParams search;
  int table_bits = kDefaultTableBits;
  bool context_sensitive = true;
  uint64_t rng_seed = 1;
  ExtendOptions extend;
  double stats_interval_seconds = 1.0;
};

struct CorpusEntry {
  uint64_t id = 0;
  InputBuffer input;
  uint64_t discovered_exec = 0;  // fast executions before discovery
  std::optional<BranchKey> target_branch;  // ledger branch being worked on
};

struct DedupKey {
  BranchKey site;
  std::string detail;

  friend auto operator<=>(const DedupKey &, const DedupKey &) = default;
};

// Crashes bin on (last branch before the crash, crash detail).
inline DedupKey DedupCrash(const RunResult &r) { return {r.verdict.site, r.verdict.detail}; }

struct CrashBin {
  uint64_t id = 0;
  DedupKey key;
  InputBuffer input;  // first input that landed in the bin
  uint64_t hits = 0;
  uint64_t discovered_exec = 0;
};

struct LedgerEntry {
  BranchKey branch;
  StmtId stmt;
  bool direction = false;
  uint64_t input_id = 0;
  CondStmtRecord record;
  std::vector<ReadRecord> reads;
  uint64_t discovered_seq = 0;
  int exhaustions = 0;
};

// Unexplored branches. Selection is FIFO by discovery; a branch whose
// per-selection budget ran out goes to a second queue that is only served
// once the first is empty.
class BranchLedger {
 public:
  // Inserts or refreshes the entry for e.branch. A refreshed entry keeps its
  // queue position and exhaustion count. Returns true when newly added.
  bool Upsert(LedgerEntry e) {
    auto it = entries_.find(e.branch);
    if (it != entries_.end()) {
      it->second.input_id = e.input_id;
      it->second.record = std::move(e.record);
      it->second.reads = std::move(e.reads);
      return false;
    }
    e.discovered_seq = next_seq_++;
    fresh_.push_back(e.branch);
    entries_.emplace(e.branch, std::move(e));
    return true;
  }

  std::optional<BranchKey> Select() {
    while (true) {
      if (fresh_.empty()) {
        if (exhausted_.empty()) return std::nullopt;
        fresh_.swap(exhausted_);
      }
      const BranchKey k = fresh_.front();
      fresh_.pop_front();
      if (entries_.contains(k)) return k;
    }
  }

  // Puts a selected branch back at low priority.
  void Requeue(const BranchKey &k) {
    auto it = entries_.find(k);
    if (it == entries_.end()) return;
    ++it->second.exhaustions;
    exhausted_.push_back(k);
  }

  void Remove(const BranchKey &k) { entries_.erase(k); }

  bool contains(const BranchKey &k) const { return entries_.contains(k); }
  const LedgerEntry &at(const BranchKey &k) const { return entries_.at(k); }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::map<BranchKey, LedgerEntry> entries_;
  std::deque<BranchKey> fresh_;
  std::deque<BranchKey> exhausted_;
  uint64_t next_seq_ = 0;
};

struct SolveTelemetry {
  BranchKey branch;
  std::string method;  // length | gradient | random
  bool explored = false;
  uint64_t execs = 0;
};

struct StatsSnapshot {
  double seconds = 0;
  uint64_t execs = 0;
  uint64_t taint_runs = 0;
  std::size_t corpus_size = 0;
  std::size_t crash_bins = 0;
  std::size_t covered_buckets = 0;
  std::size_t coverage_bits = 0;
  std::size_t ledger_size = 0;
  uint64_t solved = 0;
};

struct FuzzReport {
  std::string target;
  std::string stop_reason;  // ledger-empty | exec-budget | time-budget
  uint64_t execs = 0;
  uint64_t taint_runs = 0;
  std::size_t seeds = 0;
  std::size_t corpus_size = 0;  // seeds + admitted inputs
  std::size_t crash_bins = 0;
  std::size_t covered_buckets = 0;
  std::size_t coverage_bits = 0;
  std::size_t ledger_size = 0;
  uint64_t selections = 0;
  uint64_t solved = 0;
  uint64_t length_extensions = 0;
  double seconds = 0;
  double fast_seconds = 0;
  double taint_seconds = 0;
  std::vector<StatsSnapshot> timeline;
  std::vector<SolveTelemetry> solves;

  double fast_execs_per_second() const { return fast_seconds > 0 ? execs / fast_seconds : 0; }
  double taint_runs_per_second() const {
    return taint_seconds > 0 ? taint_runs / taint_seconds : 0;
  }
};

struct EngineObserver {
  std::function<void(const CorpusEntry &)> on_admit;
  std::function<void(const CrashBin &)> on_new_crash;
  std::function<void(const StatsSnapshot &)> on_stats;
};

class Engine {
 public:
  Engine(Target target, EngineConfig config)
      : config_(config),
        executor_(Register(std::move(target), config.rng_seed),
                  ExecutorOptions{config.table_bits, config.context_sensitive}),
        coverage_(config.table_bits),
        rng_(config.rng_seed) {}

  FuzzReport Fuzz(const std::vector<Bytes> &seeds, EngineObserver observer = {}) {
    observer_ = std::move(observer);
    start_ = std::chrono::steady_clock::now();
    next_stats_ = 0;
    FuzzReport report;
    report.target = executor_.target().target.name;
    report.seeds = seeds.size();

    for (const Bytes &s : seeds) {
      InputBuffer in;
      in.bytes = s;
      in.origin = "seed";
      RunResult tr = executor_.RunTaint(s);
      if (tr.verdict.crashed) RecordCrash(in, tr);
      coverage_.Merge(tr.trace);
      AddToCorpus(std::move(in), std::nullopt);
      UpdateLedger(corpus_.back().id, tr);
    }

    while (true) {
      if (ledger_.empty()) {
        report.stop_reason = "ledger-empty";
        break;
      }
      if (OutOfBudget()) {
        report.stop_reason = ExecBudgetHit() ? "exec-budget" : "time-budget";
        break;
      }
      const auto key = ledger_.Select();
      if (!key) break;
      // Branches flipped as a side effect are dropped lazily here.
      if (coverage_.Covered(*key)) {
        ledger_.Remove(*key);
        continue;
      }
      ++selections_;
      WorkOn(*key);
      if (coverage_.Covered(*key)) {
        ledger_.Remove(*key);
        ++solved_;
      } else {
        ledger_.Requeue(*key);
      }
      MaybeEmitStats(false);
    }
    MaybeEmitStats(true);

    report.execs = execs_;
    report.taint_runs = executor_.taint_runs();
    report.corpus_size = corpus_.size();
    report.crash_bins = crashes_.size();
    report.covered_buckets = coverage_.covered_buckets();
    report.coverage_bits = coverage_.set_bits();
    report.ledger_size = ledger_.size();
    report.selections = selections_;
    report.solved = solved_;
    report.length_extensions = length_extensions_;
    report.seconds = Elapsed();
    report.fast_seconds = executor_.fast_seconds();
    report.taint_seconds = executor_.taint_seconds();
    report.timeline = timeline_;
    report.solves = telemetry_;
    return report;
  }

  const std::vector<CorpusEntry> &corpus() const { return corpus_; }
  const std::map<DedupKey, CrashBin> &crashes() const { return crashes_; }
  const BranchLedger &ledger() const { return ledger_; }
  const CoverageTable &coverage() const { return coverage_; }
  const Executor &executor() const { return executor_; }
  const EngineConfig &config() const { return config_; }
  // Ledger branches removed because they became covered.
  const std::vector<BranchKey> &explored_log() const { return explored_log_; }

 private:
  double Elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  bool ExecBudgetHit() const { return config_.max_execs != 0 && execs_ >= config_.max_execs; }
  bool OutOfBudget() const {
    return ExecBudgetHit() || (config_.max_seconds > 0 && Elapsed() >= config_.max_seconds);
  }

  void AddToCorpus(InputBuffer in, std::optional<BranchKey> target_branch) {
    CorpusEntry e;
    e.id = corpus_.size();
    e.input = std::move(in);
    e.discovered_exec = execs_;
    e.target_branch = target_branch;
    corpus_.push_back(std::move(e));
    if (observer_.on_admit) observer_.on_admit(corpus_.back());
  }

  void RecordCrash(const InputBuffer &in, const RunResult &r) {
    const DedupKey key = DedupCrash(r);
    auto [it, inserted] = crashes_.try_emplace(key);
    ++it->second.hits;
    if (!inserted) return;
    it->second.id = crashes_.size() - 1;
    it->second.key = key;
    it->second.input = in;
    it->second.discovered_exec = execs_;
    if (observer_.on_new_crash) observer_.on_new_crash(it->second);
  }

  // Adds every not-yet-covered direction of the conditionals in `tr` to the
  // ledger, pointing at corpus entry `id`.
  void UpdateLedger(uint64_t id, RunResult &tr) {
    for (CondStmtRecord &rec : tr.cond_records) {
      rec.is_explored_true = coverage_.Covered(BranchOf(rec.stmt, true));
      rec.is_explored_false = coverage_.Covered(BranchOf(rec.stmt, false));
      for (const bool dir : {true, false}) {
        if (rec.explored(dir)) continue;
        LedgerEntry e;
        e.branch = BranchOf(rec.stmt, dir);
        e.stmt = rec.stmt;
        e.direction = dir;
        e.input_id = id;
        e.record = rec;
        e.reads = tr.read_records;
        ledger_.Upsert(std::move(e));
      }
    }
  }

  // Runs one candidate without taint. New coverage admits it (one taint
  // run); a crash files it in a bin and marks its branches covered, but the
  // input is not admitted.
  RunResult Execute(const InputBuffer &in, const RunOptions &ro) {
    ++execs_;
    RunResult r = executor_.RunFast(in.bytes, ro);
    if (r.verdict.crashed) {
      RecordCrash(in, r);
      coverage_.Merge(r.trace);
    } else if (coverage_.HasNewState(r.trace).is_new) {
      coverage_.Merge(r.trace);
      AddToCorpus(in, current_);
      RunResult tr = executor_.RunTaint(in.bytes);
      UpdateLedger(corpus_.back().id, tr);
    }
    MaybeEmitStats(false);
    return r;
  }

  void WorkOn(const BranchKey &key) {
    const LedgerEntry entry = ledger_.at(key);
    // Copied: Execute may grow corpus_.
    const InputBuffer base = corpus_[entry.input_id].input;
    current_ = key;
    const uint64_t start_execs = execs_;
    auto spent = [&] { return execs_ - start_execs; };
    auto done = [&] {
      return coverage_.Covered(key) || OutOfBudget() || spent() >= config_.branch_budget;
    };
    auto derive = [&](Bytes bytes, const char *origin) {
      InputBuffer in;
      in.bytes = std::move(bytes);
      in.parent = entry.input_id;
      in.origin = origin;
      return in;
    };
    std::string method;

    // Length exploration.
    if (const auto need = LengthRequirement(entry.record, entry.direction, entry.reads);
        need && *need > base.size() && base.size() < config_.extend.max_length) {
      method = "length";
      InputBuffer grown = Extend(base, *need, config_.extend);
      grown.parent = entry.input_id;
      grown.origin = "length";
      ++length_extensions_;
      Execute(grown, {});
    }

    if (!done() && !entry.record.offsets.empty()) {
      method = method.empty() ? "gradient" : method + "+gradient";
      SearchParams p = config_.search;
      p.little_endian = executor_.target().target.little_endian;
      p.max_execs = config_.branch_budget - std::min(config_.branch_budget, spent());
      const Evaluator eval = [&](const Bytes &bytes) -> std::optional<FOutput> {
        if (OutOfBudget()) return std::nullopt;
        RunOptions ro;
        ro.watch = entry.stmt;
        const RunResult r = Execute(derive(bytes, "gradient"), ro);
        if (!r.watched) return std::nullopt;
        return r.watched->ForDirection(entry.direction).f;
      };
      FuzzConditional(eval, ProblemFor(entry.record, entry.direction, base.bytes), p, rng_,
                      [&] { return coverage_.Covered(key) || OutOfBudget(); });
    } else if (!done() && entry.record.offsets.empty()) {
      method = method.empty() ? "random" : method + "+random";
      while (!done()) {
        const Bytes &partner = corpus_[internal::Pick(rng_, corpus_.size())].input.bytes;
        Execute(derive(Havoc(base.bytes, rng_, partner, config_.extend.max_length), "random"),
                {});
      }
    }
    telemetry_.push_back({key, method, coverage_.Covered(key), spent()});
    if (coverage_.Covered(key)) explored_log_.push_back(key);
    current_.reset();
  }

  void MaybeEmitStats(bool final) {
    const double now = Elapsed();
    if (!final && now < next_stats_) return;
    next_stats_ = now + config_.stats_interval_seconds;
    StatsSnapshot s;
    s.seconds = now;
    s.execs = execs_;
    s.taint_runs = executor_.taint_runs();
    s.corpus_size = corpus_.size();
    s.crash_bins = crashes_.size();
    s.covered_buckets = coverage_.covered_buckets();
    s.coverage_bits = coverage_.set_bits();
    s.ledger_size = ledger_.size();
    s.solved = solved_;
    timeline_.push_back(s);
    if (observer_.on_stats) observer_.on_stats(s);
  }

  EngineConfig config_;
  Executor executor_;
  CoverageTable coverage_;
  std::mt19937_64 rng_;
  BranchLedger ledger_;
  std::vector<CorpusEntry> corpus_;
  std::map<DedupKey, CrashBin> crashes_;
  std::vector<SolveTelemetry> telemetry_;
  std::vector<StatsSnapshot> timeline_;
  std::vector<BranchKey> explored_log_;
  std::optional<BranchKey> current_;
  EngineObserver observer_;
  std::chrono::steady_clock::time_point start_;
  double next_stats_ = 0;
  uint64_t execs_ = 0;
  uint64_t selections_ = 0;
  uint64_t solved_ = 0;
  uint64_t length_extensions_ = 0;
};

}  // namespace gradfuzz

#endif  // GRADFUZZ_ENGINE_HPP_
