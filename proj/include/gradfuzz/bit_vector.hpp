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

// Growable set of input byte offsets stored as a bit vector. Bit i set means
// input byte i is in the set. Equality and hashing ignore trailing zeros, so
// two vectors that differ only in trailing zeros denote the same set.

#ifndef GRADFUZZ_BIT_VECTOR_HPP_
#define GRADFUZZ_BIT_VECTOR_HPP_

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

namespace gradfuzz {

class BitVector {
 public:
  BitVector() = default;

  // Builds a vector from explicit bits, e.g. {1, 0, 0} (trailing zeros kept
  // until canonicalized).
  BitVector(std::initializer_list<int> bits) {
    for (int b : bits) push_back(b != 0);
  }

  static BitVector FromOffsets(const std::vector<std::size_t> &offsets) {
    BitVector v;
    for (std::size_t o : offsets) v.set(o);
    return v;
  }

  static BitVector Singleton(std::size_t offset) {
    BitVector v;
    v.set(offset);
    return v;
  }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  bool test(std::size_t i) const {
    if (i >= size_) return false;
    return (words_[i / 64] >> (i % 64)) & 1u;
  }

  // Sets bit i, growing the vector as needed.
  void set(std::size_t i) {
    if (i >= size_) resize(i + 1);
    words_[i / 64] |= uint64_t{1} << (i % 64);
  }

  void push_back(bool bit) {
    resize(size_ + 1);
    if (bit) words_[(size_ - 1) / 64] |= uint64_t{1} << ((size_ - 1) % 64);
  }

  void resize(std::size_t n) {
    words_.resize((n + 63) / 64, 0);
    if (n < size_ && n % 64 != 0) {
      words_.back() &= (uint64_t{1} << (n % 64)) - 1;
    }
    size_ = n;
  }

  // Removes trailing zero bits.
  void trim() {
    while (!words_.empty() && words_.back() == 0) words_.pop_back();
    if (words_.empty()) {
      size_ = 0;
      return;
    }
    size_ = (words_.size() - 1) * 64 + (64 - std::countl_zero(words_.back()));
  }

  BitVector trimmed() const {
    BitVector v = *this;
    v.trim();
    return v;
  }

  BitVector &operator|=(const BitVector &o) {
    if (o.size_ > size_) resize(o.size_);
    for (std::size_t w = 0; w < o.words_.size(); ++w) words_[w] |= o.words_[w];
    return *this;
  }

  friend BitVector operator|(BitVector a, const BitVector &b) {
    a |= b;
    return a;
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (uint64_t w : words_) n += std::popcount(w);
    return n;
  }

  // Offsets of all set bits in increasing order.
  std::vector<std::size_t> offsets() const {
    std::vector<std::size_t> out;
    for (std::size_t w = 0; w < words_.size(); ++w) {
      uint64_t bits = words_[w];
      while (bits != 0) {
        out.push_back(w * 64 + std::countr_zero(bits));
        bits &= bits - 1;
      }
    }
    return out;
  }

  // "0110" style rendering, bit 0 first.
  std::string ToString() const {
    std::string s;
    s.reserve(size_);
    for (std::size_t i = 0; i < size_; ++i) s.push_back(test(i) ? '1' : '0');
    return s;
  }

  friend bool operator==(const BitVector &a, const BitVector &b) {
    const std::size_t n = std::max(a.words_.size(), b.words_.size());
    for (std::size_t w = 0; w < n; ++w) {
      const uint64_t x = w < a.words_.size() ? a.words_[w] : 0;
      const uint64_t y = w < b.words_.size() ? b.words_[w] : 0;
      if (x != y) return false;
    }
    return true;
  }

  std::size_t Hash() const {
    std::size_t h = 0xcbf29ce484222325ull;
    std::size_t n = words_.size();
    while (n > 0 && words_[n - 1] == 0) --n;
    for (std::size_t w = 0; w < n; ++w) {
      h ^= words_[w];
      h *= 0x100000001b3ull;
    }
    return h;
  }

 private:
  std::vector<uint64_t> words_;
  std::size_t size_ = 0;
};

struct BitVectorHash {
  std::size_t operator()(const BitVector &v) const { return v.Hash(); }
};

}  // namespace gradfuzz

#endif  // GRADFUZZ_BIT_VECTOR_HPP_
