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

// Built-in synthetic targets. Each is small enough to reason about by hand
// and exercises one capability of the engine.

#ifndef GRADFUZZ_TARGETS_HPP_
#define GRADFUZZ_TARGETS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gradfuzz/constraints.hpp"
#include "gradfuzz/harness.hpp"

namespace gradfuzz::targets {

// --- magic4: 4-byte little-endian magic compared directly. ---------------
inline constexpr uint32_t kMagic4 = 0xdeadbeef;
inline constexpr uint32_t kMagic4Cond = 1;

inline Target Magic4() {
  Target t;
  t.name = "magic4";
  t.description = "crash when the first 4 bytes equal 0xdeadbeef";
  t.default_seed = Bytes(4, 0);
  t.body = [](ExecContext &ctx) {
    if (ctx.Branch(0, static_cast<int64_t>(ctx.size()), CmpOp::kLt, 4)) return;
    const TaintedValue v = ctx.Load<uint32_t>(0);
    if (ctx.Branch(kMagic4Cond, v, CmpOp::kEq, kMagic4)) ctx.Crash("magic4");
  };
  return t;
}

// --- computed_magic: the compared value is an arithmetic function of the
// input, so the constant in the comparison never appears in a solution. ----
inline constexpr int64_t kComputedMul = 7;
inline constexpr int64_t kComputedAdd = 0x1337;
inline constexpr uint32_t kComputedSolution = 0x0badf00d;
inline constexpr int64_t kComputedTarget = kComputedMul * kComputedSolution + kComputedAdd;
inline constexpr uint32_t kComputedCond = 1;

inline Target ComputedMagic() {
  Target t;
  t.name = "computed_magic";
  t.description = "crash when 7*u32(input[0..4]) + 0x1337 hits a fixed value";
  t.default_seed = Bytes(4, 0);
  t.body = [](ExecContext &ctx) {
    if (ctx.Branch(0, static_cast<int64_t>(ctx.size()), CmpOp::kLt, 4)) return;
    const TaintedValue v = ctx.Load<uint32_t>(0);
    const TaintedValue w = v * kComputedMul + kComputedAdd;
    if (ctx.Branch(kComputedCond, w, CmpOp::kEq, kComputedTarget)) ctx.Crash("computed_magic");
  };
  return t;
}

// --- read_quadratic: three stream reads (1024 bytes, then two 4-byte ints
// i and j) gate a call to a function testing i*i - 2*j > 0. The call is only
// made once the input is at least 1032 bytes long. -------------------------
inline constexpr uint32_t kQuadBufferCond = 0;
inline constexpr uint32_t kQuadICond = 1;
inline constexpr uint32_t kQuadJCond = 2;
inline constexpr uint32_t kQuadCompareCond = 3;
inline constexpr std::size_t kQuadBufferSize = 1024;
inline constexpr std::size_t kQuadMinLength = 1032;

inline Target ReadQuadratic() {
  Target t;
  t.name = "read_quadratic";
  t.description = "1024-byte read, two int reads, then i*i - 2*j > 0 in a callee";
  t.num_call_sites = 1;
  t.default_seed = Bytes(100, 0);
  t.body = [](ExecContext &ctx) {
    const StreamRead buf = ctx.Read(kQuadBufferSize);
    if (ctx.Branch(kQuadBufferCond, buf.count, CmpOp::kLt, static_cast<int64_t>(kQuadBufferSize))) {
      return;
    }
    const StreamRead ri = ctx.Read(4);
    if (ctx.Branch(kQuadICond, ri.count, CmpOp::kLt, 4)) return;
    const TaintedValue i = ctx.Load<int32_t>(ri.offset);
    const StreamRead rj = ctx.Read(4);
    if (ctx.Branch(kQuadJCond, rj.count, CmpOp::kLt, 4)) return;
    const TaintedValue j = ctx.Load<int32_t>(rj.offset);
    auto scope = ctx.Call(0);
    if (ctx.Branch(kQuadCompareCond, i * i - j * 2, CmpOp::kGt, 0)) {
      // positive side
    } else {
      // non-positive side
    }
  };
  return t;
}

// --- call_context: one function called from two call sites with input[0]
// and input[1]. Taking the false side sets a per-run flag; taking the true
// side after the flag is set crashes when input[2] == 1. The flag is folded
// into data flow (flag * input[2]) rather than tested by its own branch, so
// only calling context distinguishes "true side before the flag" from "true
// side after the flag". -------------------------------------------------
inline constexpr uint32_t kContextSizeCond = 2;
inline constexpr uint32_t kContextXCond = 0;
inline constexpr uint32_t kContextCrashCond = 1;

inline Target CallContextTarget() {
  Target t;
  t.name = "call_context";
  t.description = "crash visible only with context-sensitive branch coverage";
  t.num_call_sites = 2;
  t.default_seed = Bytes{1, 0, 0};
  t.body = [](ExecContext &ctx) {
    if (ctx.Branch(kContextSizeCond, static_cast<int64_t>(ctx.size()), CmpOp::kLt, 3)) return;
    TaintedValue trigger = 0;
    auto f = [&](const TaintedValue &x) {
      if (ctx.Branch(kContextXCond, x, CmpOp::kNe, 0)) {
        const TaintedValue armed = trigger * ctx.Byte(2);
        if (ctx.Branch(kContextCrashCond, armed, CmpOp::kEq, 1)) ctx.Crash("call_context");
      } else {
        trigger = 1;
      }
    };
    {
      auto scope = ctx.Call(0);
      f(ctx.Byte(0));
    }
    {
      auto scope = ctx.Call(1);
      f(ctx.Byte(1));
    }
  };
  return t;
}

// --- length_gate: a 16-byte header read must be complete before its last
// four bytes are checked. ---------------------------------------------------
inline constexpr uint32_t kLengthGateReadCond = 0;
inline constexpr uint32_t kLengthGateMagicCond = 1;
inline constexpr uint32_t kLengthGateMagic = 0x4c454e47;  // "GNEL" little-endian

inline Target LengthGate() {
  Target t;
  t.name = "length_gate";
  t.description = "crash when a complete 16-byte header ends with a magic";
  t.default_seed = Bytes(4, 0);
  t.body = [](ExecContext &ctx) {
    const StreamRead hdr = ctx.Read(16);
    if (ctx.Branch(kLengthGateReadCond, hdr.count, CmpOp::kLt, 16)) return;
    const TaintedValue tag = ctx.Load<uint32_t>(hdr.offset + 12);
    if (ctx.Branch(kLengthGateMagicCond, tag, CmpOp::kEq, kLengthGateMagic)) {
      ctx.Crash("length_gate");
    }
  };
  return t;
}

// --- nested_logic: ((a < 10 || b == 0x1234) && c == 0x42) over bytes a,c
// and a 16-bit b, lowered to simple conditionals. ---------------------------
inline constexpr uint32_t kNestedFirstCond = 10;

inline Predicate NestedLogicPredicate() {
  return Predicate::And(Predicate::Or(Predicate::Leaf(0), Predicate::Leaf(1)),
                        Predicate::Leaf(2));
}

inline Target NestedLogic() {
  Target t;
  t.name = "nested_logic";
  t.description = "crash on (a < 10 || b == 0x1234) && c == 0x42";
  t.default_seed = Bytes{0x80, 0, 0, 0};
  t.body = [](ExecContext &ctx) {
    if (ctx.Branch(0, static_cast<int64_t>(ctx.size()), CmpOp::kLt, 4)) return;
    const Comparison leaves[] = {
        {ctx.Byte(0), CmpOp::kLt, 10},
        {ctx.Load<uint16_t>(1), CmpOp::kEq, 0x1234},
        {ctx.Byte(3), CmpOp::kEq, 0x42},
    };
    if (ctx.BranchAll(kNestedFirstCond, NestedLogicPredicate(), leaves)) ctx.Crash("nested_logic");
  };
  return t;
}

// --- poly_threshold: a monotone cubic of a 16-bit value must exceed a
// threshold. ----------------------------------------------------------------
inline constexpr int64_t kPolyThreshold = 200'000'000'000;
inline constexpr uint32_t kPolyCond = 1;

inline int64_t PolyValue(int64_t v) { return v * v * v + 3 * v * v + 7 * v + 11; }

inline Target PolyThreshold() {
  Target t;
  t.name = "poly_threshold";
  t.description = "crash when v^3 + 3v^2 + 7v + 11 > 2e11 for a u16 v";
  t.default_seed = Bytes(2, 0);
  t.body = [](ExecContext &ctx) {
    if (ctx.Branch(0, static_cast<int64_t>(ctx.size()), CmpOp::kLt, 2)) return;
    const TaintedValue v = ctx.Load<uint16_t>(0);
    const TaintedValue p = v * v * v + TaintedValue(3) * v * v + TaintedValue(7) * v + 11;
    if (ctx.Branch(kPolyCond, p, CmpOp::kGt, kPolyThreshold)) ctx.Crash("poly_threshold");
  };
  return t;
}

// --- lava8: eight independently guarded bugs, each behind a 32-bit
// comparison on its own 4-byte slot. Crash details carry the bug id. --------
inline constexpr int kLavaBugs = 8;
inline constexpr uint32_t kLavaFirstCond = 1;

inline int64_t LavaMagic(int bug) {
  return static_cast<int64_t>(0x6c617661u ^ (0x01010101u * static_cast<uint32_t>(bug + 1)));
}

inline std::string LavaDetail(int bug) { return "lava bug " + std::to_string(bug); }

// Bug id encoded in a crash detail, if it is one of ours.
inline std::optional<int> LavaBugId(std::string_view detail) {
  constexpr std::string_view prefix = "lava bug ";
  if (detail.substr(0, prefix.size()) != prefix) return std::nullopt;
  return std::stoi(std::string(detail.substr(prefix.size())));
}

inline Target Lava8() {
  Target t;
  t.name = "lava8";
  t.description = "eight guarded crash sites with distinct bug ids";
  t.default_seed = Bytes(4 * kLavaBugs, 0);
  t.body = [](ExecContext &ctx) {
    if (ctx.Branch(0, static_cast<int64_t>(ctx.size()), CmpOp::kLt, 4 * kLavaBugs)) return;
    for (int bug = 0; bug < kLavaBugs; ++bug) {
      TaintedValue v = ctx.Load<uint32_t>(4 * static_cast<std::size_t>(bug));
      // Odd bugs compare a transformed value.
      if (bug % 2 == 1) v = v + static_cast<int64_t>(bug) * 1000;
      if (ctx.Branch(kLavaFirstCond + static_cast<uint32_t>(bug), v, CmpOp::kEq,
                     LavaMagic(bug) + (bug % 2 == 1 ? bug * 1000 : 0))) {
        ctx.Crash(LavaDetail(bug));
      }
    }
  };
  return t;
}

// --- string_magic: strcmp-style check of an 8-byte keyword. ----------------
inline constexpr std::string_view kStringMagic = "DragonFl";
inline constexpr uint32_t kStringCond = 1;

inline Target StringMagic() {
  Target t;
  t.name = "string_magic";
  t.description = "crash when the first 8 bytes spell a keyword";
  t.default_seed = Bytes(8, 'A');
  t.body = [](ExecContext &ctx) {
    if (ctx.Branch(0, static_cast<int64_t>(ctx.size()), CmpOp::kLt, 8)) return;
    if (ctx.BranchBytes(kStringCond, ctx.Bytes(0, 8), kStringMagic, CmpOp::kEq)) {
      ctx.Crash("string_magic");
    }
  };
  return t;
}

inline std::vector<Target> Catalog() {
  return {Magic4(),      ComputedMagic(), ReadQuadratic(), CallContextTarget(), LengthGate(),
          NestedLogic(), PolyThreshold(), Lava8(),         StringMagic()};
}

inline std::optional<Target> FindTarget(std::string_view name) {
  for (Target &t : Catalog()) {
    if (t.name == name) return std::move(t);
  }
  return std::nullopt;
}

}  // namespace gradfuzz::targets

#endif  // GRADFUZZ_TARGETS_HPP_
