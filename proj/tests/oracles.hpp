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

// Reference models used by the unit and acceptance tests. They are written
// for obviousness, not speed.

#ifndef GRADFUZZ_TESTS_ORACLES_HPP_
#define GRADFUZZ_TESTS_ORACLES_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "gradfuzz/bit_vector.hpp"
#include "gradfuzz/taint_store.hpp"

namespace gradfuzz::testing {

using OffsetSet = std::set<std::size_t>;

inline OffsetSet ToSet(const BitVector &v) {
  const auto offs = v.offsets();
  return OffsetSet(offs.begin(), offs.end());
}

inline BitVector FromSet(const OffsetSet &s) {
  return BitVector::FromOffsets(std::vector<std::size_t>(s.begin(), s.end()));
}

// Label -> offset set, with labels handed out per distinct set.
class NaiveLabelStore {
 public:
  uint32_t Insert(const OffsetSet &s) {
    auto [it, fresh] = ids_.try_emplace(s, static_cast<uint32_t>(sets_.size()));
    if (fresh) sets_.push_back(s);
    return it->second;
  }
  uint32_t Union(uint32_t a, uint32_t b) {
    OffsetSet u = sets_.at(a);
    u.insert(sets_.at(b).begin(), sets_.at(b).end());
    return Insert(u);
  }
  const OffsetSet &Find(uint32_t t) const { return sets_.at(t); }
  std::size_t size() const { return sets_.size(); }

 private:
  std::map<OffsetSet, uint32_t> ids_;
  std::vector<OffsetSet> sets_;
};

// Random set of offsets below `max_len`; sparse or dense with equal odds.
template <typename Rng>
OffsetSet RandomSet(Rng &rng, std::size_t max_len) {
  OffsetSet s;
  const std::size_t len = std::uniform_int_distribution<std::size_t>(0, max_len)(rng);
  const double p = std::bernoulli_distribution(0.5)(rng) ? 0.05 : 0.5;
  std::bernoulli_distribution bit(p);
  for (std::size_t i = 0; i < len; ++i) {
    if (bit(rng)) s.insert(i);
  }
  return s;
}

struct TaintOracleStats {
  std::size_t ops = 0;
  std::size_t mismatches = 0;
  std::size_t node_count = 0;
  std::size_t canonical_bits = 0;  // sum of trimmed lengths of distinct sets
};

// Random insert / union / find ops against both stores. Labels are compared
// through their offset sets; label numbering is also expected to agree since
// both hand out labels densely in first-seen order.
inline TaintOracleStats RunTaintOracle(std::size_t ops, std::size_t max_len, uint64_t seed) {
  std::mt19937_64 rng(seed);
  OffsetTree tree;
  NaiveLabelStore naive;
  TaintOracleStats st;
  std::set<OffsetSet> distinct;
  auto note = [&](const OffsetSet &s) {
    if (distinct.insert(s).second && !s.empty()) st.canonical_bits += *s.rbegin() + 1;
  };
  auto check = [&](uint32_t got, uint32_t want) {
    if (got != want || ToSet(tree.Find(got)) != naive.Find(want)) ++st.mismatches;
  };
  for (std::size_t i = 0; i < ops; ++i) {
    const int kind = naive.size() < 2 ? 0 : std::uniform_int_distribution<int>(0, 2)(rng);
    if (kind == 0) {
      const OffsetSet s = RandomSet(rng, max_len);
      note(s);
      check(tree.Insert(FromSet(s)), naive.Insert(s));
    } else if (kind == 1) {
      std::uniform_int_distribution<uint32_t> pick(0, static_cast<uint32_t>(naive.size() - 1));
      const uint32_t a = pick(rng), b = pick(rng);
      const uint32_t want = naive.Union(a, b);
      note(naive.Find(want));
      check(tree.Union(a, b), want);
    } else {
      std::uniform_int_distribution<uint32_t> pick(0, static_cast<uint32_t>(naive.size() - 1));
      const uint32_t a = pick(rng);
      if (ToSet(tree.Find(a)) != naive.Find(a)) ++st.mismatches;
    }
    ++st.ops;
  }
  st.node_count = tree.node_count();
  return st;
}

// Range bit per execution count, spelled out as a table.
inline int BucketOracle(uint64_t count) {
  struct Range {
    uint64_t lo, hi;
    int bit;
  };
  static constexpr Range kRanges[] = {{1, 1, 0},   {2, 2, 1},   {3, 3, 2},    {4, 7, 3},
                                      {8, 15, 4},  {16, 31, 5}, {32, 127, 6}, {128, UINT64_MAX, 7}};
  for (const Range &r : kRanges) {
    if (count >= r.lo && count <= r.hi) return r.bit;
  }
  return -1;
}

}  // namespace gradfuzz::testing

#endif  // GRADFUZZ_TESTS_ORACLES_HPP_
