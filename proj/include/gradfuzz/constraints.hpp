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

// Branch predicates as constraints on a blackbox function f(x).
//
// Every two-way comparison is rewritten into one of three forms, f < 0,
// f <= 0 or f == 0, where f is computed from the operand values observed at
// run time:
//
//   a <  b   f = a - b      f <  0
//   a <= b   f = a - b      f <= 0
//   a >  b   f = b - a      f <  0
//   a >= b   f = b - a      f <= 0
//   a == b   f = |a - b|    f == 0
//   a != b   f = -|a - b|   f <  0
//
// Operands are 64-bit; f is computed in 128-bit so it never overflows.

#ifndef GRADFUZZ_CONSTRAINTS_HPP_
#define GRADFUZZ_CONSTRAINTS_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gradfuzz/bit_vector.hpp"
#include "gradfuzz/coverage.hpp"
#include "gradfuzz/shape_infer.hpp"
#include "gradfuzz/taint_store.hpp"

namespace gradfuzz {

using Wide = __int128;

enum class ConstraintKind : uint8_t { kLessThanZero, kLessEqualZero, kEqualZero };

enum class CmpOp : uint8_t { kLt, kLe, kGt, kGe, kEq, kNe };

enum class OpClass : uint8_t { kInteger, kBytes };

inline constexpr CmpOp kAllCmpOps[] = {CmpOp::kLt, CmpOp::kLe, CmpOp::kGt,
                                       CmpOp::kGe, CmpOp::kEq, CmpOp::kNe};

// The operator whose outcome is the logical negation of `op`.
inline constexpr CmpOp Negate(CmpOp op) {
  switch (op) {
    case CmpOp::kLt: return CmpOp::kGe;
    case CmpOp::kLe: return CmpOp::kGt;
    case CmpOp::kGt: return CmpOp::kLe;
    case CmpOp::kGe: return CmpOp::kLt;
    case CmpOp::kEq: return CmpOp::kNe;
    case CmpOp::kNe: return CmpOp::kEq;
  }
  return op;
}

template <typename T>
constexpr bool Compare(CmpOp op, T a, T b) {
  switch (op) {
    case CmpOp::kLt: return a < b;
    case CmpOp::kLe: return a <= b;
    case CmpOp::kGt: return a > b;
    case CmpOp::kGe: return a >= b;
    case CmpOp::kEq: return a == b;
    case CmpOp::kNe: return a != b;
  }
  return false;
}

inline std::string_view CmpOpName(CmpOp op) {
  switch (op) {
    case CmpOp::kLt: return "<";
    case CmpOp::kLe: return "<=";
    case CmpOp::kGt: return ">";
    case CmpOp::kGe: return ">=";
    case CmpOp::kEq: return "==";
    case CmpOp::kNe: return "!=";
  }
  return "?";
}

inline std::string_view KindName(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::kLessThanZero: return "f<0";
    case ConstraintKind::kLessEqualZero: return "f<=0";
    case ConstraintKind::kEqualZero: return "f==0";
  }
  return "?";
}

struct FOutput {
  Wide value = 0;

  friend auto operator<=>(const FOutput &, const FOutput &) = default;
};

struct Constraint {
  FOutput f;
  ConstraintKind kind = ConstraintKind::kEqualZero;
};

inline bool Satisfied(ConstraintKind kind, FOutput f) {
  switch (kind) {
    case ConstraintKind::kLessThanZero: return f.value < 0;
    case ConstraintKind::kLessEqualZero: return f.value <= 0;
    case ConstraintKind::kEqualZero: return f.value == 0;
  }
  return false;
}

inline bool Satisfied(const Constraint &c) { return Satisfied(c.kind, c.f); }

inline Wide AbsWide(Wide v) { return v < 0 ? -v : v; }

inline Constraint Transform(CmpOp op, int64_t a, int64_t b) {
  const Wide wa = a;
  const Wide wb = b;
  switch (op) {
    case CmpOp::kLt: return {{wa - wb}, ConstraintKind::kLessThanZero};
    case CmpOp::kLe: return {{wa - wb}, ConstraintKind::kLessEqualZero};
    case CmpOp::kGt: return {{wb - wa}, ConstraintKind::kLessThanZero};
    case CmpOp::kGe: return {{wb - wa}, ConstraintKind::kLessEqualZero};
    case CmpOp::kEq: return {{AbsWide(wa - wb)}, ConstraintKind::kEqualZero};
    case CmpOp::kNe: return {{-AbsWide(wa - wb)}, ConstraintKind::kLessThanZero};
  }
  throw std::invalid_argument("bad comparison operator");
}

// Cost charged per byte of length difference in byte-sequence comparisons.
inline constexpr Wide kLengthPenaltyPerByte = 256;

// Distance between two byte strings: per-position absolute differences plus
// a fixed penalty per byte of length mismatch. Zero iff the strings are equal.
inline Wide ByteDistance(std::span<const uint8_t> x, std::span<const uint8_t> y) {
  const std::size_t common = std::min(x.size(), y.size());
  Wide d = 0;
  for (std::size_t i = 0; i < common; ++i) {
    d += x[i] > y[i] ? x[i] - y[i] : y[i] - x[i];
  }
  const std::size_t extra = x.size() > y.size() ? x.size() - y.size() : y.size() - x.size();
  return d + kLengthPenaltyPerByte * static_cast<Wide>(extra);
}

// Equality-style (kEq) or inequality-style (kNe) byte-sequence comparison.
inline Constraint TransformBytes(CmpOp op, std::span<const uint8_t> x,
                                 std::span<const uint8_t> y) {
  const Wide d = ByteDistance(x, y);
  switch (op) {
    case CmpOp::kEq: return {{d}, ConstraintKind::kEqualZero};
    case CmpOp::kNe: return {{-d}, ConstraintKind::kLessThanZero};
    default: throw std::invalid_argument("byte comparison must be == or !=");
  }
}

// ---------------------------------------------------------------------------
// Compound predicates.
//
// A predicate tree built from comparisons with && and || is lowered into a
// chain of two-way conditionals, each testing a single comparison. Node i
// tests leaf `leaf`; its edges either continue at another node or leave the
// chain with the overall outcome. For `a && b` this gives
//   if (a) { if (b) {T} else {F} } else {F}
// with the false outcome reachable from both tests.

class Predicate {
 public:
  enum class Kind : uint8_t { kLeaf, kAnd, kOr };

  static Predicate Leaf(int index) {
    Predicate p;
    p.kind_ = Kind::kLeaf;
    p.leaf_ = index;
    return p;
  }
  static Predicate And(Predicate a, Predicate b) { return Binary(Kind::kAnd, std::move(a), std::move(b)); }
  static Predicate Or(Predicate a, Predicate b) { return Binary(Kind::kOr, std::move(a), std::move(b)); }

  Kind kind() const { return kind_; }
  int leaf() const { return leaf_; }
  const Predicate &lhs() const { return *lhs_; }
  const Predicate &rhs() const { return *rhs_; }

  // Direct evaluation with short-circuit semantics.
  bool Evaluate(const std::function<bool(int)> &leaf_value) const {
    switch (kind_) {
      case Kind::kLeaf: return leaf_value(leaf_);
      case Kind::kAnd: return lhs_->Evaluate(leaf_value) && rhs_->Evaluate(leaf_value);
      case Kind::kOr: return lhs_->Evaluate(leaf_value) || rhs_->Evaluate(leaf_value);
    }
    return false;
  }

 private:
  static Predicate Binary(Kind k, Predicate a, Predicate b) {
    Predicate p;
    p.kind_ = k;
    p.lhs_ = std::make_shared<const Predicate>(std::move(a));
    p.rhs_ = std::make_shared<const Predicate>(std::move(b));
    return p;
  }

  Kind kind_ = Kind::kLeaf;
  int leaf_ = 0;
  std::shared_ptr<const Predicate> lhs_;
  std::shared_ptr<const Predicate> rhs_;
};

struct SplitCond {
  static constexpr int kTrueExit = -1;
  static constexpr int kFalseExit = -2;

  int leaf = 0;
  int on_true = kTrueExit;   // node index or exit
  int on_false = kFalseExit;

  friend bool operator==(const SplitCond &, const SplitCond &) = default;
};

namespace internal {

// Emits nodes for `p` whose exits go to `t` / `f`; returns its entry node.
inline int Lower(const Predicate &p, int t, int f, std::vector<SplitCond> &out) {
  switch (p.kind()) {
    case Predicate::Kind::kLeaf:
      out.push_back({p.leaf(), t, f});
      return static_cast<int>(out.size()) - 1;
    case Predicate::Kind::kAnd: {
      // Lower the right side first so the left side can jump to it.
      const int rhs = Lower(p.rhs(), t, f, out);
      return Lower(p.lhs(), rhs, f, out);
    }
    case Predicate::Kind::kOr: {
      const int rhs = Lower(p.rhs(), t, f, out);
      return Lower(p.lhs(), t, rhs, out);
    }
  }
  return f;
}

}  // namespace internal

// Lowered chain; node 0 is the entry.
inline std::vector<SplitCond> SplitLogical(const Predicate &p) {
  std::vector<SplitCond> rev;
  const int entry = internal::Lower(p, SplitCond::kTrueExit, SplitCond::kFalseExit, rev);
  // Renumber so the entry comes first and nodes appear in evaluation order.
  const int n = static_cast<int>(rev.size());
  std::vector<int> order;
  std::vector<int> new_index(n, -1);
  std::vector<int> stack = {entry};
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    if (i < 0 || new_index[i] >= 0) continue;
    new_index[i] = static_cast<int>(order.size());
    order.push_back(i);
    stack.push_back(rev[i].on_false);
    stack.push_back(rev[i].on_true);
  }
  auto remap = [&](int target) { return target < 0 ? target : new_index[target]; };
  std::vector<SplitCond> out;
  out.reserve(order.size());
  for (int i : order) out.push_back({rev[i].leaf, remap(rev[i].on_true), remap(rev[i].on_false)});
  return out;
}

// Walks a lowered chain, testing one leaf per node.
template <typename LeafTest>
bool EvaluateChain(const std::vector<SplitCond> &chain, LeafTest &&test) {
  int node = 0;
  while (node >= 0) {
    const SplitCond &c = chain[static_cast<std::size_t>(node)];
    node = test(node, c.leaf) ? c.on_true : c.on_false;
  }
  return node == SplitCond::kTrueExit;
}

// ---------------------------------------------------------------------------

// Identifies a conditional statement instance: static id plus call context.
struct StmtId {
  uint32_t cond_id = 0;
  uint32_t context = 0;

  friend auto operator<=>(const StmtId &, const StmtId &) = default;
};

// Basic-block numbering used by the harness: conditional k lives in block
// 3k+1 and branches to 3k+2 (true) or 3k+3 (false).
inline BranchKey BranchOf(StmtId s, bool direction) {
  return {3 * s.cond_id + 1, 3 * s.cond_id + (direction ? 2 : 3), s.context};
}

// One conditional statement as observed by a taint-tracking run (first
// execution of the statement under its context).
struct CondStmtRecord {
  StmtId stmt;
  BranchKey branch;  // the direction actually taken
  bool taken = false;
  CmpOp op = CmpOp::kEq;
  OpClass op_class = OpClass::kInteger;
  ConstraintKind kind = ConstraintKind::kEqualZero;  // of the taken direction
  TaintLabel lhs_label = 0;
  TaintLabel rhs_label = 0;
  int64_t lhs_value = 0;
  int64_t rhs_value = 0;
  std::vector<uint8_t> lhs_bytes;  // byte-sequence comparisons only
  std::vector<uint8_t> rhs_bytes;
  BitVector offsets;
  std::vector<ValueShape> shapes;
  bool is_explored_true = false;
  bool is_explored_false = false;
  // Index of the read call whose return value flows into an operand.
  std::optional<uint32_t> length_source;
  std::optional<std::size_t> length_hint;

  // Constraint that holds exactly when the statement goes `direction`.
  Constraint ForDirection(bool direction) const {
    const CmpOp want = direction ? op : Negate(op);
    if (op_class == OpClass::kBytes) return TransformBytes(want, lhs_bytes, rhs_bytes);
    return Transform(want, lhs_value, rhs_value);
  }

  bool explored(bool direction) const {
    return direction ? is_explored_true : is_explored_false;
  }
};

}  // namespace gradfuzz

#endif  // GRADFUZZ_CONSTRAINTS_HPP_
