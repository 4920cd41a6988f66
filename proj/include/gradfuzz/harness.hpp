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

// In-process target runtime.
//
// Targets are ordinary C++ functions written against ExecContext. Input
// bytes come out of the context as TaintedValues; arithmetic on them merges
// taint labels; every two-way conditional goes through ExecContext::Branch,
// which returns the real outcome and records the branch. A target runs in
// one of two modes:
//
//  * fast:  only the path trace (plus, optionally, the operands of one
//           watched conditional) is recorded;
//  * taint: every input byte gets a singleton label, labels propagate through
//           arithmetic, and each conditional yields a CondStmtRecord with its
//           operand values, taint offsets and inferred value shapes.
//
// Targets must be deterministic functions of their input.

#ifndef GRADFUZZ_HARNESS_HPP_
#define GRADFUZZ_HARNESS_HPP_

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "gradfuzz/bit_vector.hpp"
#include "gradfuzz/constraints.hpp"
#include "gradfuzz/coverage.hpp"
#include "gradfuzz/input_buffer.hpp"
#include "gradfuzz/length_explore.hpp"
#include "gradfuzz/shape_infer.hpp"
#include "gradfuzz/taint_store.hpp"

namespace gradfuzz {

class ExecContext;

enum class RunMode : uint8_t { kFast, kTaint };

inline constexpr TaintLabel kEmptyLabel = 0;
inline constexpr uint32_t kNoReadTag = std::numeric_limits<uint32_t>::max();

// Thrown through the target body by ExecContext::Crash.
struct TargetCrash {
  std::string detail;
};

struct TaintedValue {
  int64_t value = 0;
  TaintLabel label = kEmptyLabel;
  uint32_t read_tag = kNoReadTag;  // set on counts returned by Read()
  ExecContext *ctx = nullptr;

  TaintedValue() = default;
  // Untainted constant.
  TaintedValue(int64_t v) : value(v) {}  // NOLINT(google-explicit-constructor)
  TaintedValue(int64_t v, TaintLabel t, ExecContext *c) : value(v), label(t), ctx(c) {}
};

struct TaintedBytes {
  Bytes data;
  TaintLabel label = kEmptyLabel;
};

struct StreamRead {
  TaintedValue count;  // bytes delivered, tagged with the read index
  std::size_t offset = 0;
  std::size_t length = 0;
};

// One comparison used as a leaf of a compound predicate.
struct Comparison {
  TaintedValue lhs;
  CmpOp op = CmpOp::kEq;
  TaintedValue rhs;
};

struct Target {
  std::string name;
  std::string description;
  uint32_t num_call_sites = 0;
  bool little_endian = true;
  Bytes default_seed;
  std::function<void(ExecContext &)> body;
};

// A target with call-site ids assigned.
struct RegisteredTarget {
  Target target;
  std::vector<CallSiteId> call_sites;
};

inline constexpr uint64_t kDefaultCallSiteSeed = 0x5eed;

// Assigns each call site a random nonzero 32-bit id. Ids within one target
// are distinct.
inline RegisteredTarget Register(Target target, uint64_t seed = kDefaultCallSiteSeed) {
  RegisteredTarget r;
  std::mt19937_64 rng(seed ^ std::hash<std::string>{}(target.name));
  while (r.call_sites.size() < target.num_call_sites) {
    const auto id = static_cast<uint32_t>(rng());
    bool dup = id == 0;
    for (CallSiteId s : r.call_sites) dup = dup || s.id == id;
    if (!dup) r.call_sites.push_back({id});
  }
  r.target = std::move(target);
  return r;
}

struct Verdict {
  bool crashed = false;
  std::string detail;
  BranchKey site;  // last branch executed before the crash
};

struct RunResult {
  RunMode mode = RunMode::kFast;
  TraceSummary trace;
  std::vector<CondStmtRecord> cond_records;  // taint mode only
  std::vector<ReadRecord> read_records;      // taint mode only
  Verdict verdict;
  // First execution of the watched statement, if it was reached.
  std::optional<CondStmtRecord> watched;
  std::vector<BranchKey> sequence;  // only with RunOptions::record_sequence
};

struct RunOptions {
  std::optional<StmtId> watch;
  bool record_sequence = false;
};

class ExecContext {
 public:
  std::size_t size() const { return input_.size(); }
  RunMode mode() const { return mode_; }

  TaintedValue Byte(std::size_t offset) {
    CheckRange(offset, 1);
    return {input_[offset], ByteLabel(offset), this};
  }

  // Reads sizeof(T) consecutive input bytes as one integer of type T.
  template <typename T>
  TaintedValue Load(std::size_t offset) {
    static_assert(std::is_integral_v<T> && sizeof(T) <= 8);
    constexpr std::size_t n = sizeof(T);
    CheckRange(offset, n);
    uint64_t raw = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t byte_index = little_endian_ ? i : n - 1 - i;
      raw |= uint64_t{input_[offset + i]} << (8 * byte_index);
    }
    const auto value = static_cast<int64_t>(static_cast<T>(raw));
    TaintLabel label = kEmptyLabel;
    if (mode_ == RunMode::kTaint) {
      types_->ObserveRead(offset, n);
      types_->ObserveSignedness(offset, std::is_signed_v<T>);
      label = RangeLabel(offset, n);
    }
    return {value, label, this};
  }

  TaintedBytes Bytes(std::size_t offset, std::size_t length) {
    CheckRange(offset, length);
    TaintedBytes out;
    out.data.assign(input_.begin() + static_cast<std::ptrdiff_t>(offset),
                    input_.begin() + static_cast<std::ptrdiff_t>(offset + length));
    if (mode_ == RunMode::kTaint) out.label = RangeLabel(offset, length);
    return out;
  }

  // Read-like call on the input stream: delivers up to `requested` bytes and
  // returns where they landed. The count is tagged with this call's index.
  StreamRead Read(std::size_t requested) {
    const auto index = static_cast<uint32_t>(read_count_++);
    const ReadRecord r = stream_.Read(requested, index);
    if (mode_ == RunMode::kTaint) reads_.push_back(r);
    StreamRead out;
    out.count = TaintedValue(static_cast<int64_t>(r.returned), kEmptyLabel, this);
    out.count.read_tag = index;
    out.offset = r.offset;
    out.length = r.returned;
    return out;
  }

  // Two-way conditional on `lhs op rhs`.
  bool Branch(uint32_t cond_id, const TaintedValue &lhs, CmpOp op, const TaintedValue &rhs) {
    const bool outcome = Compare(op, lhs.value, rhs.value);
    const StmtId stmt{cond_id, CurrentContext()};
    RecordBranch(stmt, outcome);
    if (mode_ == RunMode::kTaint || (watch_ && *watch_ == stmt)) {
      Observe(stmt, outcome, [&](CondStmtRecord &r) {
        r.op = op;
        r.op_class = OpClass::kInteger;
        r.lhs_value = lhs.value;
        r.rhs_value = rhs.value;
        r.lhs_label = lhs.label;
        r.rhs_label = rhs.label;
        if (lhs.read_tag != kNoReadTag) r.length_source = lhs.read_tag;
        else if (rhs.read_tag != kNoReadTag) r.length_source = rhs.read_tag;
      });
    }
    return outcome;
  }

  // Byte-sequence comparison (strcmp/memcmp style); op is kEq or kNe.
  bool BranchBytes(uint32_t cond_id, const TaintedBytes &lhs,
                   std::span<const uint8_t> rhs, CmpOp op) {
    const bool equal = lhs.data.size() == rhs.size() &&
                       std::equal(lhs.data.begin(), lhs.data.end(), rhs.begin());
    const bool outcome = op == CmpOp::kEq ? equal : !equal;
    const StmtId stmt{cond_id, CurrentContext()};
    RecordBranch(stmt, outcome);
    if (mode_ == RunMode::kTaint || (watch_ && *watch_ == stmt)) {
      Observe(stmt, outcome, [&](CondStmtRecord &r) {
        r.op = op;
        r.op_class = OpClass::kBytes;
        r.lhs_bytes = lhs.data;
        r.rhs_bytes.assign(rhs.begin(), rhs.end());
        r.lhs_label = lhs.label;
        r.rhs_label = kEmptyLabel;
      });
    }
    return outcome;
  }

  bool BranchBytes(uint32_t cond_id, const TaintedBytes &lhs, std::string_view rhs,
                   CmpOp op) {
    return BranchBytes(
        cond_id, lhs,
        std::span<const uint8_t>(reinterpret_cast<const uint8_t *>(rhs.data()), rhs.size()),
        op);
  }

  // Compound predicate over `leaves`. The predicate is lowered to a chain of
  // simple conditionals; chain node i records as conditional first_cond_id+i.
  bool BranchAll(uint32_t first_cond_id, const Predicate &pred,
                 std::span<const Comparison> leaves) {
    const auto chain = SplitLogical(pred);
    return EvaluateChain(chain, [&](int node, int leaf) {
      const Comparison &c = leaves[static_cast<std::size_t>(leaf)];
      return Branch(first_cond_id + static_cast<uint32_t>(node), c.lhs, c.op, c.rhs);
    });
  }

  // Calls through registered call site `site`; the returned guard pops the
  // context when it goes out of scope.
  class CallScope {
   public:
    CallScope(ExecContext &ctx, CallSiteId site) : ctx_(ctx), site_(site) {
      ctx_.context_ = ctx_.context_.Push(site_);
    }
    ~CallScope() { ctx_.context_ = ctx_.context_.Pop(site_); }
    CallScope(const CallScope &) = delete;
    CallScope &operator=(const CallScope &) = delete;

   private:
    ExecContext &ctx_;
    CallSiteId site_;
  };

  [[nodiscard]] CallScope Call(std::size_t site_index) {
    if (site_index >= call_sites_.size()) {
      throw std::out_of_range("unregistered call site");
    }
    return CallScope(*this, call_sites_[site_index]);
  }

  template <typename F>
  decltype(auto) CallFn(std::size_t site_index, F &&fn) {
    auto scope = Call(site_index);
    return std::forward<F>(fn)();
  }

  [[noreturn]] void Crash(std::string detail) { throw TargetCrash{std::move(detail)}; }

  // Label merge used by TaintedValue arithmetic.
  TaintLabel Combine(TaintLabel a, TaintLabel b) {
    if (mode_ != RunMode::kTaint || a == b || b == kEmptyLabel) return a;
    if (a == kEmptyLabel) return b;
    return tree_->CachedUnion(a, b);
  }

  CallContext context() const { return context_; }

 private:
  friend class Executor;

  uint32_t CurrentContext() const { return context_sensitive_ ? context_.value : 0; }

  void CheckRange(std::size_t offset, std::size_t n) {
    if (offset > input_.size() || n > input_.size() - offset) Crash("out-of-bounds input read");
  }

  TaintLabel ByteLabel(std::size_t offset) {
    if (mode_ != RunMode::kTaint) return kEmptyLabel;
    TaintLabel &l = byte_labels_[offset];
    if (l == kUnsetLabel) l = tree_->Insert(BitVector::Singleton(offset));
    return l;
  }

  TaintLabel RangeLabel(std::size_t offset, std::size_t n) {
    TaintLabel t = kEmptyLabel;
    for (std::size_t i = 0; i < n; ++i) t = Combine(t, ByteLabel(offset + i));
    return t;
  }

  void RecordBranch(StmtId stmt, bool outcome) {
    const BranchKey key = BranchOf(stmt, outcome);
    trace_->Record(key);
    last_branch_ = key;
    if (record_sequence_) sequence_.push_back(key);
  }

  template <typename Fill>
  void Observe(StmtId stmt, bool outcome, Fill &&fill) {
    if (watch_ && *watch_ == stmt) {
      if (!watched_) {
        watched_.emplace();
        InitRecord(*watched_, stmt, outcome);
        fill(*watched_);
        watched_->kind = watched_->ForDirection(outcome).kind;
      }
      if (mode_ != RunMode::kTaint) return;
    }
    auto [it, inserted] = record_index_.try_emplace(stmt, records_.size());
    if (!inserted) {
      CondStmtRecord &r = records_[it->second];
      (outcome ? r.is_explored_true : r.is_explored_false) = true;
      return;
    }
    CondStmtRecord &r = records_.emplace_back();
    InitRecord(r, stmt, outcome);
    fill(r);
    r.kind = r.ForDirection(outcome).kind;
  }

  static void InitRecord(CondStmtRecord &r, StmtId stmt, bool outcome) {
    r.stmt = stmt;
    r.branch = BranchOf(stmt, outcome);
    r.taken = outcome;
    (outcome ? r.is_explored_true : r.is_explored_false) = true;
  }

  static constexpr TaintLabel kUnsetLabel = std::numeric_limits<TaintLabel>::max();

  RunMode mode_ = RunMode::kFast;
  std::span<const uint8_t> input_;
  InputStream stream_{std::span<const uint8_t>()};
  std::size_t read_count_ = 0;
  bool little_endian_ = true;
  bool context_sensitive_ = true;
  std::span<const CallSiteId> call_sites_;
  CallContext context_;
  PathTraceTable *trace_ = nullptr;
  OffsetTree *tree_ = nullptr;
  TypeTable *types_ = nullptr;
  std::vector<TaintLabel> byte_labels_;
  std::vector<CondStmtRecord> records_;
  std::map<StmtId, std::size_t> record_index_;
  std::vector<ReadRecord> reads_;
  std::optional<StmtId> watch_;
  std::optional<CondStmtRecord> watched_;
  BranchKey last_branch_;
  bool record_sequence_ = false;
  std::vector<BranchKey> sequence_;
};

// ---------------------------------------------------------------------------
// TaintedValue arithmetic. Results are tainted by the union of the operand
// labels; values wrap like 64-bit two's-complement integers. A read tag
// carries over from either operand (left first).

namespace internal {

inline ExecContext *ContextOf(const TaintedValue &a, const TaintedValue &b) {
  return a.ctx != nullptr ? a.ctx : b.ctx;
}

inline TaintedValue Merge(const TaintedValue &a, const TaintedValue &b, int64_t value) {
  ExecContext *ctx = ContextOf(a, b);
  TaintedValue out(value, ctx ? ctx->Combine(a.label, b.label) : kEmptyLabel, ctx);
  out.read_tag = a.read_tag != kNoReadTag ? a.read_tag : b.read_tag;
  return out;
}

inline uint64_t U(int64_t v) { return static_cast<uint64_t>(v); }
inline int64_t S(uint64_t v) { return static_cast<int64_t>(v); }

}  // namespace internal

inline TaintedValue operator+(const TaintedValue &a, const TaintedValue &b) {
  return internal::Merge(a, b, internal::S(internal::U(a.value) + internal::U(b.value)));
}
inline TaintedValue operator-(const TaintedValue &a, const TaintedValue &b) {
  return internal::Merge(a, b, internal::S(internal::U(a.value) - internal::U(b.value)));
}
inline TaintedValue operator*(const TaintedValue &a, const TaintedValue &b) {
  return internal::Merge(a, b, internal::S(internal::U(a.value) * internal::U(b.value)));
}
inline TaintedValue operator/(const TaintedValue &a, const TaintedValue &b) {
  if (b.value == 0 || (a.value == std::numeric_limits<int64_t>::min() && b.value == -1)) {
    throw TargetCrash{"arithmetic fault: division"};
  }
  return internal::Merge(a, b, a.value / b.value);
}
inline TaintedValue operator%(const TaintedValue &a, const TaintedValue &b) {
  if (b.value == 0 || (a.value == std::numeric_limits<int64_t>::min() && b.value == -1)) {
    throw TargetCrash{"arithmetic fault: remainder"};
  }
  return internal::Merge(a, b, a.value % b.value);
}
inline TaintedValue operator&(const TaintedValue &a, const TaintedValue &b) {
  return internal::Merge(a, b, a.value & b.value);
}
inline TaintedValue operator|(const TaintedValue &a, const TaintedValue &b) {
  return internal::Merge(a, b, a.value | b.value);
}
inline TaintedValue operator^(const TaintedValue &a, const TaintedValue &b) {
  return internal::Merge(a, b, a.value ^ b.value);
}
inline TaintedValue operator<<(const TaintedValue &a, int shift) {
  TaintedValue out = a;
  out.value = internal::S(internal::U(a.value) << (shift & 63));
  return out;
}
inline TaintedValue operator>>(const TaintedValue &a, int shift) {
  TaintedValue out = a;
  out.value = a.value >> (shift & 63);
  return out;
}
inline TaintedValue operator-(const TaintedValue &a) { return TaintedValue(0) - a; }

// ---------------------------------------------------------------------------

struct ExecutorOptions {
  int table_bits = kDefaultTableBits;
  bool context_sensitive = true;
};

// Runs one registered target. Owns the reusable per-run state (trace table,
// taint store, type table); not thread-safe.
class Executor {
 public:
  explicit Executor(RegisteredTarget target, ExecutorOptions opts = {})
      : target_(std::move(target)), opts_(opts), trace_(opts.table_bits) {}

  const RegisteredTarget &target() const { return target_; }
  const ExecutorOptions &options() const { return opts_; }

  RunResult RunTaint(std::span<const uint8_t> input, const RunOptions &ro = {}) {
    const auto start = std::chrono::steady_clock::now();
    tree_.Reset();
    tree_.Insert(BitVector());  // the empty set is label 0
    types_.Reset(input.size());
    RunResult r = Run(RunMode::kTaint, input, ro);
    ++taint_runs_;
    taint_time_ += std::chrono::steady_clock::now() - start;
    return r;
  }

  RunResult RunFast(std::span<const uint8_t> input, const RunOptions &ro = {}) {
    const auto start = std::chrono::steady_clock::now();
    RunResult r = Run(RunMode::kFast, input, ro);
    ++fast_runs_;
    fast_time_ += std::chrono::steady_clock::now() - start;
    return r;
  }

  uint64_t fast_runs() const { return fast_runs_; }
  uint64_t taint_runs() const { return taint_runs_; }
  double fast_seconds() const { return std::chrono::duration<double>(fast_time_).count(); }
  double taint_seconds() const { return std::chrono::duration<double>(taint_time_).count(); }

  // Taint store of the most recent taint run.
  const OffsetTree &taint_store() const { return tree_; }
  const TypeTable &type_table() const { return types_; }

 private:
  RunResult Run(RunMode mode, std::span<const uint8_t> input, const RunOptions &ro) {
    trace_.Clear();
    ExecContext ctx;
    ctx.mode_ = mode;
    ctx.input_ = input;
    ctx.stream_ = InputStream(input);
    ctx.little_endian_ = target_.target.little_endian;
    ctx.context_sensitive_ = opts_.context_sensitive;
    ctx.call_sites_ = target_.call_sites;
    ctx.trace_ = &trace_;
    ctx.watch_ = ro.watch;
    ctx.record_sequence_ = ro.record_sequence;
    if (mode == RunMode::kTaint) {
      ctx.tree_ = &tree_;
      ctx.types_ = &types_;
      ctx.byte_labels_.assign(input.size(), ExecContext::kUnsetLabel);
    }

    RunResult r;
    r.mode = mode;
    try {
      target_.target.body(ctx);
    } catch (const TargetCrash &c) {
      r.verdict.crashed = true;
      r.verdict.detail = c.detail;
      r.verdict.site = ctx.last_branch_;
    }
    r.trace = trace_.Summary();
    r.watched = std::move(ctx.watched_);
    r.sequence = std::move(ctx.sequence_);
    if (mode == RunMode::kTaint) {
      r.read_records = std::move(ctx.reads_);
      r.cond_records = std::move(ctx.records_);
      for (CondStmtRecord &rec : r.cond_records) {
        rec.offsets = tree_.CachedFind(tree_.CachedUnion(rec.lhs_label, rec.rhs_label));
        rec.shapes = ShapesFor(rec.offsets, types_);
      }
    }
    return r;
  }

  RegisteredTarget target_;
  ExecutorOptions opts_;
  PathTraceTable trace_;
  OffsetTree tree_;
  TypeTable types_;
  uint64_t fast_runs_ = 0;
  uint64_t taint_runs_ = 0;
  std::chrono::steady_clock::duration fast_time_{};
  std::chrono::steady_clock::duration taint_time_{};
};

}  // namespace gradfuzz

#endif  // GRADFUZZ_HARNESS_HPP_
