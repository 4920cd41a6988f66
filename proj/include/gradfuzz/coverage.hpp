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

// Context-sensitive branch coverage.
//
// A branch is (block before the conditional, block after it, calling
// context), where the context is the xor of the ids of every call site on
// the stack. Each run counts branch executions in a path trace table; a
// coverage table kept across runs stores, per bucket, one bit for each
// execution-count range ever observed:
//
//   bit:    0    1    2    3       4        5         6          7
//   count:  1    2    3    4..7    8..15    16..31    32..127    128+

#ifndef GRADFUZZ_COVERAGE_HPP_
#define GRADFUZZ_COVERAGE_HPP_

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace gradfuzz {

inline constexpr int kDefaultTableBits = 20;

struct CallSiteId {
  uint32_t id = 0;
};

struct CallContext {
  uint32_t value = 0;

  CallContext Push(CallSiteId site) const { return {value ^ site.id}; }
  // Xor is its own inverse, so pop is the same operation as push.
  CallContext Pop(CallSiteId site) const { return {value ^ site.id}; }

  friend bool operator==(CallContext, CallContext) = default;
};

struct BranchKey {
  uint32_t prev = 0;
  uint32_t cur = 0;
  uint32_t context = 0;

  friend auto operator<=>(const BranchKey &, const BranchKey &) = default;
};

struct BranchKeyHash {
  std::size_t operator()(const BranchKey &k) const {
    return static_cast<std::size_t>(Mix(k));
  }
  static uint64_t Mix(const BranchKey &k) {
    uint64_t x = (uint64_t{k.prev} << 32) ^ k.cur;
    x ^= uint64_t{k.context} * 0x9e3779b97f4a7c15ull;
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }
};

// Bucket of `key` in a table of 2^bits entries. No per-process salt.
inline uint32_t BranchBucket(const BranchKey &key, int bits) {
  return static_cast<uint32_t>(BranchKeyHash::Mix(key) &
                               ((uint64_t{1} << bits) - 1));
}

// Range bit for an execution count; count must be positive.
inline int BucketIndex(uint64_t count) {
  if (count == 0) throw std::invalid_argument("branch count must be >= 1");
  if (count <= 3) return static_cast<int>(count) - 1;
  if (count <= 7) return 3;
  if (count <= 15) return 4;
  if (count <= 31) return 5;
  if (count <= 127) return 6;
  return 7;
}

struct TraceEntry {
  uint32_t bucket = 0;
  uint32_t count = 0;

  friend bool operator==(const TraceEntry &, const TraceEntry &) = default;
};

// Sparse snapshot of one run's trace, sorted by bucket.
using TraceSummary = std::vector<TraceEntry>;

// Per-run execution counters. Only touched buckets are cleared between runs,
// so reuse across runs costs O(branches executed), not O(table size).
class PathTraceTable {
 public:
  explicit PathTraceTable(int bits = kDefaultTableBits)
      : bits_(bits), counts_(std::size_t{1} << bits, 0) {}

  int bits() const { return bits_; }
  std::size_t size() const { return counts_.size(); }

  void Record(const BranchKey &key) { RecordBucket(BranchBucket(key, bits_)); }

  void RecordBucket(uint32_t bucket) {
    uint32_t &c = counts_[bucket];
    if (c == 0) touched_.push_back(bucket);
    if (c != std::numeric_limits<uint32_t>::max()) ++c;
  }

  uint32_t count(const BranchKey &key) const {
    return counts_[BranchBucket(key, bits_)];
  }
  uint32_t bucket_count(uint32_t bucket) const { return counts_[bucket]; }

  // Test hook for the saturation contract.
  void SetBucketCount(uint32_t bucket, uint32_t value) {
    if (counts_[bucket] == 0 && value != 0) touched_.push_back(bucket);
    counts_[bucket] = value;
  }

  void Clear() {
    for (uint32_t b : touched_) counts_[b] = 0;
    touched_.clear();
  }

  TraceSummary Summary() const {
    TraceSummary out;
    out.reserve(touched_.size());
    for (uint32_t b : touched_) {
      if (counts_[b] != 0) out.push_back({b, counts_[b]});
    }
    std::sort(out.begin(), out.end(),
              [](const TraceEntry &a, const TraceEntry &b) {
                return a.bucket < b.bucket;
              });
    return out;
  }

 private:
  int bits_;
  std::vector<uint32_t> counts_;
  std::vector<uint32_t> touched_;
};

struct NewState {
  bool is_new = false;
  // (bucket, range bit) pairs a merge of this trace would set.
  std::vector<std::pair<uint32_t, int>> newly_set;
};

class CoverageTable {
 public:
  explicit CoverageTable(int bits = kDefaultTableBits)
      : bits_(bits), ranges_(std::size_t{1} << bits, 0) {}

  int bits() const { return bits_; }

  NewState HasNewState(const TraceSummary &trace) const {
    NewState s;
    for (const TraceEntry &e : trace) {
      const int bit = BucketIndex(e.count);
      if ((ranges_[e.bucket] & (1u << bit)) == 0) {
        s.is_new = true;
        s.newly_set.emplace_back(e.bucket, bit);
      }
    }
    return s;
  }

  NewState HasNewState(const PathTraceTable &trace) const {
    return HasNewState(trace.Summary());
  }

  // Returns the number of bits newly set.
  std::size_t Merge(const TraceSummary &trace) {
    std::size_t added = 0;
    for (const TraceEntry &e : trace) {
      const uint8_t mask = static_cast<uint8_t>(1u << BucketIndex(e.count));
      if ((ranges_[e.bucket] & mask) == 0) {
        if (ranges_[e.bucket] == 0) ++covered_buckets_;
        ranges_[e.bucket] |= mask;
        ++set_bits_;
        ++added;
      }
    }
    return added;
  }

  std::size_t Merge(const PathTraceTable &trace) {
    return Merge(trace.Summary());
  }

  // True when some past run executed the branch at least once.
  bool Covered(const BranchKey &key) const {
    return ranges_[BranchBucket(key, bits_)] != 0;
  }

  uint8_t ranges(uint32_t bucket) const { return ranges_[bucket]; }
  std::size_t covered_buckets() const { return covered_buckets_; }
  std::size_t set_bits() const { return set_bits_; }

  void Reset() {
    std::fill(ranges_.begin(), ranges_.end(), 0);
    covered_buckets_ = 0;
    set_bits_ = 0;
  }

 private:
  int bits_;
  std::vector<uint8_t> ranges_;
  std::size_t covered_buckets_ = 0;
  std::size_t set_bits_ = 0;
};

}  // namespace gradfuzz

#endif  // GRADFUZZ_COVERAGE_HPP_
