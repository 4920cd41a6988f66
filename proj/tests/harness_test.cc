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

#include "gradfuzz/harness.hpp"

#include <random>

#include "gradfuzz/targets.hpp"
#include "gtest/gtest.h"
#include "oracles.hpp"

namespace gradfuzz {
namespace {

const CondStmtRecord *FindRecord(const RunResult &r, uint32_t cond) {
  for (const CondStmtRecord &c : r.cond_records) {
    if (c.stmt.cond_id == cond) return &c;
  }
  return nullptr;
}

Target SumTarget() {
  Target t;
  t.name = "sum";
  t.default_seed = Bytes(8, 0);
  t.body = [](ExecContext &ctx) {
    ctx.Branch(0, ctx.Byte(0) + ctx.Byte(5), CmpOp::kEq, 77);
    ctx.Branch(1, ctx.Byte(2) * 3 - 1, CmpOp::kGt, 0);
    ctx.Branch(2, ctx.Byte(3), CmpOp::kNe, 9);
  };
  return t;
}

TEST(HarnessTest, ArithmeticMergesLabels) {
  Executor ex(Register(SumTarget()));
  const RunResult r = ex.RunTaint(Bytes(8, 1));
  ASSERT_EQ(r.cond_records.size(), 3u);
  EXPECT_EQ(testing::ToSet(r.cond_records[0].offsets), (testing::OffsetSet{0, 5}));
  EXPECT_EQ(testing::ToSet(r.cond_records[1].offsets), (testing::OffsetSet{2}));
  EXPECT_EQ(r.cond_records[0].lhs_value, 2);
  EXPECT_EQ(r.cond_records[1].lhs_value, 2);
}

TEST(HarnessTest, CalleeComparisonTaintedByBothInts) {
  Executor ex(Register(targets::ReadQuadratic()));
  const RunResult r = ex.RunTaint(Bytes(1032, 0));
  const CondStmtRecord *rec = FindRecord(r, targets::kQuadCompareCond);
  ASSERT_NE(rec, nullptr);
  std::vector<std::size_t> want;
  for (std::size_t o = 1024; o < 1032; ++o) want.push_back(o);
  EXPECT_EQ(rec->offsets.offsets(), want);
  ASSERT_EQ(rec->shapes.size(), 2u);
  EXPECT_EQ(rec->shapes[0].size, 4);
  EXPECT_TRUE(rec->shapes[0].is_signed);
  EXPECT_NE(rec->stmt.context, 0u);
}

TEST(HarnessTest, FastAndTaintAgreeOnPathAndVerdict) {
  std::mt19937_64 rng(4);
  for (const Target &t : targets::Catalog()) {
    Executor ex(Register(t));
    for (int i = 0; i < 50; ++i) {
      Bytes in = t.default_seed;
      for (uint8_t &b : in) {
        if (rng() % 4 == 0) b = static_cast<uint8_t>(rng());
      }
      RunOptions ro;
      ro.record_sequence = true;
      const RunResult f = ex.RunFast(in, ro);
      const RunResult s = ex.RunTaint(in, ro);
      ASSERT_EQ(f.trace, s.trace) << t.name;
      ASSERT_EQ(f.sequence, s.sequence) << t.name;
      ASSERT_EQ(f.verdict.crashed, s.verdict.crashed) << t.name;
      ASSERT_TRUE(f.cond_records.empty());
    }
  }
}

TEST(HarnessTest, RunsAreDeterministic) {
  for (const Target &t : targets::Catalog()) {
    Executor a(Register(t)), b(Register(t));
    const RunResult x = a.RunTaint(t.default_seed);
    a.RunTaint(Bytes(3, 7));  // state from other runs must not leak
    const RunResult y = a.RunTaint(t.default_seed);
    const RunResult z = b.RunTaint(t.default_seed);
    ASSERT_EQ(x.trace, y.trace) << t.name;
    ASSERT_EQ(x.trace, z.trace) << t.name;
    ASSERT_EQ(x.cond_records.size(), y.cond_records.size()) << t.name;
    for (std::size_t i = 0; i < x.cond_records.size(); ++i) {
      ASSERT_EQ(x.cond_records[i].offsets, y.cond_records[i].offsets) << t.name;
    }
  }
}

TEST(HarnessTest, CrashVerdictCarriesDetailAndSite) {
  Executor ex(Register(targets::Magic4()));
  const RunResult r = ex.RunFast(Bytes{0xef, 0xbe, 0xad, 0xde});
  ASSERT_TRUE(r.verdict.crashed);
  EXPECT_EQ(r.verdict.detail, "magic4");
  EXPECT_EQ(r.verdict.site, BranchOf({targets::kMagic4Cond, 0}, true));
  EXPECT_FALSE(ex.RunFast(Bytes(4, 0)).verdict.crashed);
}

TEST(HarnessTest, OutOfBoundsReadCrashes) {
  Target t;
  t.name = "oob";
  t.body = [](ExecContext &ctx) { ctx.Load<uint32_t>(2); };
  Executor ex(Register(t));
  const RunResult r = ex.RunFast(Bytes(4, 0));
  ASSERT_TRUE(r.verdict.crashed);
  EXPECT_EQ(r.verdict.detail, "out-of-bounds input read");
}

TEST(HarnessTest, DivisionByZeroCrashes) {
  Target t;
  t.name = "div";
  t.body = [](ExecContext &ctx) { ctx.Branch(0, TaintedValue(10) / ctx.Byte(0), CmpOp::kEq, 1); };
  Executor ex(Register(t));
  EXPECT_TRUE(ex.RunFast(Bytes{0}).verdict.crashed);
  EXPECT_FALSE(ex.RunFast(Bytes{2}).verdict.crashed);
}

TEST(HarnessTest, WatchReturnsFirstExecution) {
  Target t;
  t.name = "loop";
  t.body = [](ExecContext &ctx) {
    for (int i = 0; i < 3; ++i) ctx.Branch(0, ctx.Byte(0) + i, CmpOp::kEq, 2);
  };
  Executor ex(Register(t));
  RunOptions ro;
  ro.watch = StmtId{0, 0};
  const RunResult r = ex.RunFast(Bytes{0}, ro);
  ASSERT_TRUE(r.watched.has_value());
  EXPECT_EQ(r.watched->lhs_value, 0);
  const RunResult s = ex.RunTaint(Bytes{0});
  ASSERT_EQ(s.cond_records.size(), 1u);
  EXPECT_TRUE(s.cond_records[0].is_explored_true);
  EXPECT_TRUE(s.cond_records[0].is_explored_false);
}

TEST(HarnessTest, ContextInsensitiveRunsUseContextZero) {
  Executor ex(Register(targets::CallContextTarget()), ExecutorOptions{20, false});
  for (const CondStmtRecord &r : ex.RunTaint(Bytes{1, 1, 0}).cond_records) {
    EXPECT_EQ(r.stmt.context, 0u);
  }
}

TEST(HarnessTest, CallSiteIdsAreDistinctAndNonzero) {
  const RegisteredTarget r = Register(targets::CallContextTarget());
  ASSERT_EQ(r.call_sites.size(), 2u);
  EXPECT_NE(r.call_sites[0].id, 0u);
  EXPECT_NE(r.call_sites[0].id, r.call_sites[1].id);
}

TEST(HarnessTest, BytesComparisonRecordsDistance) {
  Executor ex(Register(targets::StringMagic()));
  const RunResult r = ex.RunTaint(Bytes{'D', 'r', 'a', 'g', 'o', 'n', 'F', 'k'});
  const CondStmtRecord *rec = FindRecord(r, targets::kStringCond);
  ASSERT_NE(rec, nullptr);
  EXPECT_EQ(rec->op_class, OpClass::kBytes);
  EXPECT_TRUE(rec->ForDirection(true).f.value == 1);
  EXPECT_EQ(rec->offsets.count(), 8u);
}

TEST(HarnessTest, ReadCountCarriesTag) {
  Executor ex(Register(targets::LengthGate()));
  const RunResult r = ex.RunTaint(Bytes(4, 0));
  const CondStmtRecord *rec = FindRecord(r, targets::kLengthGateReadCond);
  ASSERT_NE(rec, nullptr);
  EXPECT_EQ(rec->length_source, 0u);
  EXPECT_TRUE(rec->offsets.empty());
}

}  // namespace
}  // namespace gradfuzz
