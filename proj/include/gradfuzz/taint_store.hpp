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

// Taint label storage. Every distinct set of input byte offsets is stored once
// in a binary trie keyed by its canonical bit vector (bit 0 first, trailing
// zeros removed) and named by a dense integer label: the index of the trie
// node in a lookup table. Insert walks the bits from the root; find walks
// parent links from the labelled node back to the root; union is find, OR,
// insert. Node count grows with the number of distinct vectors, not with
// their length.

#ifndef GRADFUZZ_TAINT_STORE_HPP_
#define GRADFUZZ_TAINT_STORE_HPP_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gradfuzz/bit_vector.hpp"

namespace gradfuzz {

using TaintLabel = uint32_t;

// The label space is exhausted.
class StoreFullError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A label that was never handed out by this store.
class UnknownLabelError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class OffsetTree {
 public:
  static constexpr uint64_t kDefaultLabelLimit =
      std::numeric_limits<TaintLabel>::max();

  // `label_limit` caps how many labels may be assigned; it exists so the
  // store-full path is testable without 2^32 inserts.
  explicit OffsetTree(uint64_t label_limit = kDefaultLabelLimit)
      : label_limit_(label_limit) {
    Reset();
  }

  // Drops every node, label and memo entry.
  void Reset() {
    nodes_.clear();
    nodes_.push_back(Node{});
    labels_.clear();
    union_memo_.clear();
    find_memo_.clear();
    tree_walks_ = 0;
  }

  TaintLabel Insert(BitVector v) {
    v.trim();
    uint32_t node = kRoot;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const bool bit = v.test(i);
      uint32_t child = bit ? nodes_[node].right : nodes_[node].left;
      if (child == kNone) {
        child = static_cast<uint32_t>(nodes_.size());
        Node n;
        n.parent = node;
        n.is_right = bit;
        nodes_.push_back(n);
        (bit ? nodes_[node].right : nodes_[node].left) = child;
      }
      node = child;
    }
    // A label already stored in a node is never replaced.
    if (nodes_[node].label == kNoLabel) {
      if (labels_.size() >= label_limit_) {
        throw StoreFullError("taint label space exhausted");
      }
      nodes_[node].label = static_cast<TaintLabel>(labels_.size());
      labels_.push_back(node);
    }
    return nodes_[node].label;
  }

  BitVector Find(TaintLabel t) const {
    CheckLabel(t);
    ++tree_walks_;
    std::vector<bool> reversed;
    uint32_t node = labels_[t];
    while (nodes_[node].parent != kNone) {
      reversed.push_back(nodes_[node].is_right);
      node = nodes_[node].parent;
    }
    BitVector v;
    v.resize(reversed.size());
    for (std::size_t i = 0; i < reversed.size(); ++i) {
      if (reversed[reversed.size() - 1 - i]) v.set(i);
    }
    return v;
  }

  TaintLabel Union(TaintLabel a, TaintLabel b) {
    BitVector u = Find(a);
    u |= Find(b);
    return Insert(std::move(u));
  }

  // Memoized find: repeated lookups of one label walk the tree once.
  const BitVector &CachedFind(TaintLabel t) {
    auto it = find_memo_.find(t);
    if (it != find_memo_.end()) return it->second;
    return find_memo_.emplace(t, Find(t)).first->second;
  }

  // Memoized union keyed by the unordered pair {a, b}.
  TaintLabel CachedUnion(TaintLabel a, TaintLabel b) {
    if (a == b) {
      CheckLabel(a);
      return a;
    }
    const uint64_t key = a < b ? (uint64_t{a} << 32 | b) : (uint64_t{b} << 32 | a);
    auto it = union_memo_.find(key);
    if (it != union_memo_.end()) return it->second;
    BitVector u = CachedFind(a);
    u |= CachedFind(b);
    const TaintLabel t = Insert(std::move(u));
    union_memo_.emplace(key, t);
    return t;
  }

  std::size_t label_count() const { return labels_.size(); }
  std::size_t node_count() const { return nodes_.size(); }
  // Number of parent walks performed by Find so far.
  uint64_t tree_walks() const { return tree_walks_; }

  // One "label k -> o1,o2,..." line per label.
  std::string DebugDump() const {
    std::ostringstream os;
    for (TaintLabel t = 0; t < labels_.size(); ++t) {
      os << "label " << t << " ->";
      const auto offs = Find(t).offsets();
      for (std::size_t i = 0; i < offs.size(); ++i) {
        os << (i == 0 ? " " : ",") << offs[i];
      }
      os << "\n";
    }
    return os.str();
  }

 private:
  static constexpr uint32_t kNone = std::numeric_limits<uint32_t>::max();
  static constexpr uint32_t kNoLabel = std::numeric_limits<uint32_t>::max();
  static constexpr uint32_t kRoot = 0;

  struct Node {
    uint32_t left = kNone;
    uint32_t right = kNone;
    uint32_t parent = kNone;
    TaintLabel label = kNoLabel;
    bool is_right = false;
  };

  void CheckLabel(TaintLabel t) const {
    if (t >= labels_.size()) {
      throw UnknownLabelError("unknown taint label " + std::to_string(t));
    }
  }

  uint64_t label_limit_;
  std::vector<Node> nodes_;
  std::vector<uint32_t> labels_;  // label -> node index
  std::unordered_map<uint64_t, TaintLabel> union_memo_;
  std::unordered_map<TaintLabel, BitVector> find_memo_;
  mutable uint64_t tree_walks_ = 0;
};

}  // namespace gradfuzz

#endif  // GRADFUZZ_TAINT_STORE_HPP_
