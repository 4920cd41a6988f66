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

// Command-line front end: fuzz, repro, bench and list-targets.

#ifndef GRADFUZZ_CLI_HPP_
#define GRADFUZZ_CLI_HPP_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gradfuzz/corpus_io.hpp"
#include "gradfuzz/engine.hpp"
#include "gradfuzz/harness.hpp"
#include "gradfuzz/json_io.hpp"
#include "gradfuzz/targets.hpp"

namespace gradfuzz::cli {

struct Config {
  std::string target;
  std::string seed_dir;  // empty: the target's built-in seed
  std::string out_dir;
  double seconds = 0;
  uint64_t execs = 0;
  int64_t delta = 1;
  double learning_rate = 1.0;
  int max_iters = 256;
  uint64_t branch_budget = 4096;
  int resample_limit = 16;
  int table_bits = kDefaultTableBits;
  bool context_sensitive = true;
  uint64_t rng_seed = 1;
  int filler = 0;
  std::size_t max_length = kDefaultMaxInputLength;
  double stats_interval = 1.0;
  std::string stats_file;

  // Throws std::invalid_argument on the first bad field.
  void Validate() const {
    auto need = [](bool ok, const char *what) {
      if (!ok) throw std::invalid_argument(what);
    };
    need(seconds >= 0, "--time must be >= 0");
    need(delta >= 1, "--delta must be >= 1");
    need(learning_rate > 0, "--learning-rate must be > 0");
    need(max_iters > 0, "--max-iters must be > 0");
    need(branch_budget > 0, "--branch-budget must be > 0");
    need(resample_limit > 0, "--resample-limit must be > 0");
    need(table_bits >= 8 && table_bits <= 28, "--table-bits must be in [8, 28]");
    need(filler >= 0 && filler <= 255, "--filler must be a byte value");
    need(max_length > 0, "--max-len must be > 0");
    need(stats_interval > 0, "--stats-interval must be > 0");
  }

  EngineConfig ToEngineConfig() const {
    EngineConfig c;
    c.max_execs = execs;
    c.max_seconds = seconds;
    c.branch_budget = branch_budget;
    c.search.delta = delta;
    c.search.learning_rate = learning_rate;
    c.search.max_iters = max_iters;
    c.search.max_execs = branch_budget;
    c.search.resample_limit = resample_limit;
    c.table_bits = table_bits;
    c.context_sensitive = context_sensitive;
    c.rng_seed = rng_seed;
    c.extend.filler = static_cast<uint8_t>(filler);
    c.extend.max_length = max_length;
    c.stats_interval_seconds = stats_interval;
    return c;
  }
};

inline Target RequireTarget(const std::string &name) {
  auto t = targets::FindTarget(name);
  if (!t) throw std::invalid_argument("unknown target '" + name + "' (see list-targets)");
  return std::move(*t);
}

inline int CmdFuzz(const Config &cfg, std::ostream &out, std::ostream &err) {
  cfg.Validate();
  Target target = RequireTarget(cfg.target);
  std::vector<Bytes> seeds;
  if (cfg.seed_dir.empty()) {
    seeds.push_back(target.default_seed);
  } else {
    seeds = ReadSeedDir(cfg.seed_dir);
    if (seeds.empty()) throw std::invalid_argument("seed dir is empty: " + cfg.seed_dir);
  }
  if (cfg.out_dir.empty()) throw std::invalid_argument("--out is required");
  CorpusWriter writer(cfg.out_dir);

  std::unique_ptr<std::ofstream> stats_file;
  std::ostream *stats = &out;
  if (!cfg.stats_file.empty()) {
    stats_file = std::make_unique<std::ofstream>(cfg.stats_file, std::ios::trunc);
    if (!*stats_file) throw std::invalid_argument("cannot open stats file " + cfg.stats_file);
    stats = stats_file.get();
  }

  Engine engine(std::move(target), cfg.ToEngineConfig());
  EngineObserver obs = writer.Observer();
  obs.on_stats = [stats](const StatsSnapshot &s) { *stats << json(s).dump() << "\n" << std::flush; };
  const FuzzReport report = engine.Fuzz(seeds, obs);
  WriteFileText(fs::path(cfg.out_dir) / "report.json", json(report).dump(2) + "\n");
  err << "gradfuzz: " << report.target << " stopped (" << report.stop_reason << ") after "
      << report.execs << " execs, corpus " << report.corpus_size << ", crash bins "
      << report.crash_bins << "\n";
  return 0;
}

inline std::string Hex(const Bytes &b, std::size_t limit = 64) {
  std::ostringstream os;
  for (std::size_t i = 0; i < b.size() && i < limit; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(b[i]);
  }
  if (b.size() > limit) os << "...";
  return os.str();
}

inline int CmdRepro(const Config &cfg, const std::string &input_path, bool as_json,
                    std::ostream &out) {
  Target target = RequireTarget(cfg.target);
  if (!fs::is_regular_file(input_path)) {
    throw std::invalid_argument("input file not found: " + input_path);
  }
  const Bytes input = ReadFileBytes(input_path);
  Executor ex(Register(std::move(target), cfg.rng_seed),
              ExecutorOptions{cfg.table_bits, cfg.context_sensitive});
  const RunResult fast = ex.RunFast(input);
  const RunResult taint = ex.RunTaint(input);
  if (as_json) {
    json j{{"target", cfg.target}, {"input_length", input.size()}, {"fast", fast},
           {"taint", taint}};
    out << j.dump(2) << "\n";
    return 0;
  }
  out << "target:  " << cfg.target << "\n";
  out << "input:   " << input.size() << " bytes " << Hex(input) << "\n";
  out << "verdict: " << (fast.verdict.crashed ? "crash (" + fast.verdict.detail + ")" : "ok")
      << "\n";
  out << "branches: " << fast.trace.size() << " buckets hit (fast), " << taint.trace.size()
      << " (taint)\n";
  for (const CondStmtRecord &r : taint.cond_records) {
    out << "  cond " << r.stmt.cond_id << " ctx " << r.stmt.context << " took "
        << (r.taken ? "true " : "false") << " " << CmpOpName(r.op) << " " << KindName(r.kind)
        << " offsets=" << r.offsets.offsets().size();
    if (r.op_class == OpClass::kInteger) out << " lhs=" << r.lhs_value << " rhs=" << r.rhs_value;
    if (r.length_source) out << " read#" << *r.length_source;
    out << "\n";
  }
  return 0;
}

struct BenchRow {
  std::string target;
  double fast_per_sec = 0;
  double taint_per_sec = 0;
};

// Runs each target's seed `runs` times in each mode.
inline std::vector<BenchRow> Bench(const std::vector<Target> &targets, int runs) {
  std::vector<BenchRow> rows;
  for (const Target &t : targets) {
    Executor ex(Register(t));
    const Bytes &in = t.default_seed;
    using clock = std::chrono::steady_clock;
    const auto a = clock::now();
    for (int i = 0; i < runs; ++i) ex.RunFast(in);
    const auto b = clock::now();
    for (int i = 0; i < runs; ++i) ex.RunTaint(in);
    const auto c = clock::now();
    rows.push_back({t.name, runs / std::chrono::duration<double>(b - a).count(),
                    runs / std::chrono::duration<double>(c - b).count()});
  }
  return rows;
}

inline int CmdBench(const std::vector<std::string> &names, int runs, bool as_json,
                    std::ostream &out) {
  if (runs <= 0) throw std::invalid_argument("--runs must be > 0");
  std::vector<Target> ts;
  if (names.empty()) {
    ts = targets::Catalog();
  } else {
    for (const std::string &n : names) ts.push_back(RequireTarget(n));
  }
  const auto rows = Bench(ts, runs);
  if (as_json) {
    json j = json::array();
    for (const BenchRow &r : rows) {
      j.push_back({{"target", r.target}, {"fast_per_sec", r.fast_per_sec},
                   {"taint_per_sec", r.taint_per_sec}});
    }
    out << j.dump(2) << "\n";
    return 0;
  }
  out << std::left << std::setw(18) << "target" << std::right << std::setw(16) << "fast/s"
      << std::setw(16) << "taint/s" << std::setw(10) << "ratio" << "\n";
  for (const BenchRow &r : rows) {
    out << std::left << std::setw(18) << r.target << std::right << std::fixed
        << std::setprecision(0) << std::setw(16) << r.fast_per_sec << std::setw(16)
        << r.taint_per_sec << std::setprecision(1) << std::setw(10)
        << r.fast_per_sec / r.taint_per_sec << "\n";
  }
  return 0;
}

inline int CmdListTargets(std::ostream &out) {
  for (const Target &t : targets::Catalog()) {
    out << std::left << std::setw(18) << t.name << t.description << "\n";
  }
  return 0;
}

// Entry point. Exit codes: 0 ok, 1 runtime/usage error, CLI11 codes for
// parse failures.
inline int Run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"gradfuzz: taint-guided gradient-descent fuzzer"};
  app.require_subcommand(1);
  Config cfg;

  auto add_engine_flags = [&cfg](CLI::App *sub) {
    sub->add_option("--target,-t", cfg.target, "built-in target name")->required()
        ->envname("GRADFUZZ_TARGET");
    sub->add_option("--table-bits", cfg.table_bits, "log2 of coverage table size")
        ->envname("GRADFUZZ_TABLE_BITS");
    sub->add_option("--context-sensitive", cfg.context_sensitive,
                    "include calling context in branch identity")
        ->envname("GRADFUZZ_CONTEXT_SENSITIVE");
    sub->add_option("--seed", cfg.rng_seed, "random seed")->envname("GRADFUZZ_SEED");
  };

  CLI::App *fuzz = app.add_subcommand("fuzz", "run the fuzzing loop");
  add_engine_flags(fuzz);
  fuzz->add_option("--seeds,-s", cfg.seed_dir, "seed directory (default: built-in seed)")
      ->envname("GRADFUZZ_SEEDS");
  fuzz->add_option("--out,-o", cfg.out_dir, "output directory")->required()
      ->envname("GRADFUZZ_OUT");
  fuzz->add_option("--time", cfg.seconds, "wall-clock budget in seconds (0 = none)")
      ->envname("GRADFUZZ_TIME");
  fuzz->add_option("--execs", cfg.execs, "execution budget (0 = none)")
      ->envname("GRADFUZZ_EXECS");
  fuzz->add_option("--delta", cfg.delta, "finite-difference step")->envname("GRADFUZZ_DELTA");
  fuzz->add_option("--learning-rate", cfg.learning_rate, "initial descent step scale")
      ->envname("GRADFUZZ_LEARNING_RATE");
  fuzz->add_option("--max-iters", cfg.max_iters, "line-search iterations per descend")
      ->envname("GRADFUZZ_MAX_ITERS");
  fuzz->add_option("--branch-budget", cfg.branch_budget, "executions per branch selection")
      ->envname("GRADFUZZ_BRANCH_BUDGET");
  fuzz->add_option("--resample-limit", cfg.resample_limit, "random restarts per search")
      ->envname("GRADFUZZ_RESAMPLE_LIMIT");
  fuzz->add_option("--filler", cfg.filler, "byte used when growing inputs")
      ->envname("GRADFUZZ_FILLER");
  fuzz->add_option("--max-len", cfg.max_length, "maximum input length")
      ->envname("GRADFUZZ_MAX_LEN");
  fuzz->add_option("--stats-interval", cfg.stats_interval, "seconds between stats lines")
      ->envname("GRADFUZZ_STATS_INTERVAL");
  fuzz->add_option("--stats-file", cfg.stats_file, "write stats lines here, not stdout")
      ->envname("GRADFUZZ_STATS_FILE");

  CLI::App *repro = app.add_subcommand("repro", "run one input in both modes");
  add_engine_flags(repro);
  std::string input_path;
  bool as_json = false;
  repro->add_option("input", input_path, "input file")->required();
  repro->add_flag("--json", as_json, "machine-readable output");

  CLI::App *bench = app.add_subcommand("bench", "fast vs taint executions per second");
  std::vector<std::string> bench_targets;
  int runs = 10000;
  bench->add_option("--targets", bench_targets, "targets (default: all)")->delimiter(',');
  bench->add_option("--runs", runs, "runs per mode");
  bench->add_flag("--json", as_json, "machine-readable output");

  CLI::App *list = app.add_subcommand("list-targets", "print the built-in targets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e, out, err);
  }

  try {
    if (*fuzz) return CmdFuzz(cfg, out, err);
    if (*repro) return CmdRepro(cfg, input_path, as_json, out);
    if (*bench) return CmdBench(bench_targets, runs, as_json, out);
    if (*list) return CmdListTargets(out);
  } catch (const std::exception &e) {
    err << "gradfuzz: error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace gradfuzz::cli

#endif  // GRADFUZZ_CLI_HPP_
