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

// JSON views of records, run results, stats and reports (debug dumps, the
// stats stream and corpus sidecars).

#ifndef GRADFUZZ_JSON_IO_HPP_
#define GRADFUZZ_JSON_IO_HPP_

#include <cstdint>
#include <limits>
#include <string>

#include "json.hpp"

#include "gradfuzz/constraints.hpp"
#include "gradfuzz/coverage.hpp"
#include "gradfuzz/engine.hpp"
#include "gradfuzz/harness.hpp"
#include "gradfuzz/shape_infer.hpp"

namespace gradfuzz {

using json = nlohmann::json;

// 128-bit values that fit in 64 bits become numbers, others decimal strings.
inline json WideToJson(Wide v) {
  if (v >= std::numeric_limits<int64_t>::min() && v <= std::numeric_limits<int64_t>::max()) {
    return static_cast<int64_t>(v);
  }
  const bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1
                            : static_cast<unsigned __int128>(v);
  std::string s;
  while (u != 0) {
    s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  return (neg ? "-" : "") + s;
}

inline void to_json(json &j, const BranchKey &k) {
  j = json{{"prev", k.prev}, {"cur", k.cur}, {"context", k.context}};
}

inline void to_json(json &j, const ValueShape &s) {
  j = json{{"offset", s.offset}, {"size", s.size}, {"signed", s.is_signed}};
}

inline void to_json(json &j, const ReadRecord &r) {
  j = json{{"index", r.index}, {"offset", r.offset}, {"requested", r.requested},
           {"returned", r.returned}};
}

inline void to_json(json &j, const CondStmtRecord &r) {
  j = json{{"cond", r.stmt.cond_id},
           {"context", r.stmt.context},
           {"branch", r.branch},
           {"taken", r.taken},
           {"op", std::string(CmpOpName(r.op))},
           {"op_class", r.op_class == OpClass::kBytes ? "bytes" : "integer"},
           {"kind", std::string(KindName(r.kind))},
           {"f", WideToJson(r.ForDirection(r.taken).f.value)},
           {"f_other", WideToJson(r.ForDirection(!r.taken).f.value)},
           {"offsets", r.offsets.offsets()},
           {"shapes", r.shapes},
           {"explored_true", r.is_explored_true},
           {"explored_false", r.is_explored_false}};
  if (r.op_class == OpClass::kInteger) {
    j["lhs"] = r.lhs_value;
    j["rhs"] = r.rhs_value;
  }
  if (r.length_source) j["length_source"] = *r.length_source;
}

inline void to_json(json &j, const RunResult &r) {
  j = json{{"mode", r.mode == RunMode::kTaint ? "taint" : "fast"},
           {"verdict", r.verdict.crashed ? "crash" : "ok"},
           {"branches", r.trace.size()}};
  if (r.verdict.crashed) {
    j["crash"] = json{{"detail", r.verdict.detail}, {"site", r.verdict.site}};
  }
  json trace = json::array();
  for (const TraceEntry &e : r.trace) trace.push_back({e.bucket, e.count});
  j["trace"] = trace;
  if (r.mode == RunMode::kTaint) {
    j["cond_records"] = r.cond_records;
    j["read_records"] = r.read_records;
  }
}

inline void to_json(json &j, const StatsSnapshot &s) {
  j = json{{"t", s.seconds},
           {"execs", s.execs},
           {"taint_runs", s.taint_runs},
           {"corpus", s.corpus_size},
           {"crash_bins", s.crash_bins},
           {"covered_branches", s.covered_buckets},
           {"coverage_bits", s.coverage_bits},
           {"ledger", s.ledger_size},
           {"solved", s.solved}};
}

inline void to_json(json &j, const SolveTelemetry &t) {
  j = json{{"branch", t.branch}, {"method", t.method}, {"explored", t.explored},
           {"execs", t.execs}};
}

inline void to_json(json &j, const FuzzReport &r) {
  j = json{{"target", r.target},
           {"stop_reason", r.stop_reason},
           {"execs", r.execs},
           {"taint_runs", r.taint_runs},
           {"seeds", r.seeds},
           {"corpus_size", r.corpus_size},
           {"crash_bins", r.crash_bins},
           {"covered_branches", r.covered_buckets},
           {"coverage_bits", r.coverage_bits},
           {"ledger_size", r.ledger_size},
           {"selections", r.selections},
           {"solved", r.solved},
           {"length_extensions", r.length_extensions},
           {"seconds", r.seconds},
           {"fast_execs_per_sec", r.fast_execs_per_second()},
           {"taint_runs_per_sec", r.taint_runs_per_second()},
           {"timeline", r.timeline},
           {"solves", r.solves}};
}

// Sidecar metadata. Contains no wall-clock fields so identical runs write
// identical files.
inline json CorpusMeta(const CorpusEntry &e) {
  json j{{"id", e.id},
         {"origin", e.input.origin},
         {"length", e.input.size()},
         {"discovered_exec", e.discovered_exec}};
  j["parent"] = e.input.parent ? json(*e.input.parent) : json(nullptr);
  if (e.input.extended_from) j["extended_from"] = *e.input.extended_from;
  if (e.target_branch) j["target_branch"] = *e.target_branch;
  return j;
}

inline json CrashMeta(const CrashBin &b) {
  json j{{"id", b.id},
         {"detail", b.key.detail},
         {"site", b.key.site},
         {"origin", b.input.origin},
         {"length", b.input.size()},
         {"discovered_exec", b.discovered_exec}};
  j["parent"] = b.input.parent ? json(*b.input.parent) : json(nullptr);
  return j;
}

}  // namespace gradfuzz

#endif  // GRADFUZZ_JSON_IO_HPP_
