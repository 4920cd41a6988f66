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

// Shape and type inference: which input bytes a target reads together as one
// primitive value, and whether that value is used as signed or unsigned.

#ifndef GRADFUZZ_SHAPE_INFER_HPP_
#define GRADFUZZ_SHAPE_INFER_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "gradfuzz/bit_vector.hpp"

namespace gradfuzz {

struct ValueShape {
  std::size_t offset = 0;
  uint8_t size = 1;  // 1, 2, 4 or 8
  bool is_signed = false;

  friend bool operator==(const ValueShape &, const ValueShape &) = default;
};

inline bool IsPrimitiveWidth(std::size_t size) {
  return size == 1 || size == 2 || size == 4 || size == 8;
}

class TypeTable {
 public:
  TypeTable() = default;
  explicit TypeTable(std::size_t input_size) { Reset(input_size); }

  void Reset(std::size_t input_size) {
    sizes_.assign(input_size, 0);
    signed_seen_.assign(input_size, false);
    unsigned_seen_.assign(input_size, false);
  }

  std::size_t input_size() const { return sizes_.size(); }

  // A read of `size` consecutive input bytes starting at `offset`. Keeps the
  // smallest primitive size seen at an offset; other sizes are ignored.
  void ObserveRead(std::size_t offset, std::size_t size) {
    if (!IsPrimitiveWidth(size)) return;
    if (offset >= sizes_.size() || size > sizes_.size() - offset) return;
    uint8_t &cur = sizes_[offset];
    if (cur == 0 || cur > size) cur = static_cast<uint8_t>(size);
  }

  // Any unsigned use wins over signed uses.
  void ObserveSignedness(std::size_t offset, bool used_as_signed) {
    if (offset >= sizes_.size()) return;
    (used_as_signed ? signed_seen_ : unsigned_seen_)[offset] = true;
  }

  // 0 when unassigned.
  uint8_t size_at(std::size_t offset) const {
    return offset < sizes_.size() ? sizes_[offset] : 0;
  }

  // Never-observed offsets default to unsigned.
  bool is_signed_at(std::size_t offset) const {
    if (offset >= sizes_.size()) return false;
    return signed_seen_[offset] && !unsigned_seen_[offset];
  }

 private:
  std::vector<uint8_t> sizes_;
  std::vector<bool> signed_seen_;
  std::vector<bool> unsigned_seen_;
};

// Partitions `offsets` into value components. Candidate groups are the
// table entries whose bytes all lie in the set; they are claimed smallest
// size first, then earliest offset first, skipping any that overlap an
// already claimed group. Unclaimed offsets become single bytes (unsigned
// unless the table recorded a 1-byte read there). Output is sorted by
// offset, disjoint, and covers the set exactly.
inline std::vector<ValueShape> ShapesFor(const BitVector &offsets,
                                         const TypeTable &table) {
  const auto offs = offsets.offsets();
  std::vector<ValueShape> candidates;
  for (std::size_t o : offs) {
    const std::size_t size = table.size_at(o);
    if (size <= 1) continue;
    bool all_in = true;
    for (std::size_t k = 1; k < size && all_in; ++k) all_in = offsets.test(o + k);
    if (all_in) {
      candidates.push_back({o, static_cast<uint8_t>(size), table.is_signed_at(o)});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const ValueShape &a, const ValueShape &b) {
                     return a.size != b.size ? a.size < b.size : a.offset < b.offset;
                   });
  BitVector claimed;
  std::vector<ValueShape> out;
  for (const ValueShape &c : candidates) {
    bool free = true;
    for (std::size_t k = 0; k < c.size && free; ++k) free = !claimed.test(c.offset + k);
    if (!free) continue;
    for (std::size_t k = 0; k < c.size; ++k) claimed.set(c.offset + k);
    out.push_back(c);
  }
  for (std::size_t o : offs) {
    if (claimed.test(o)) continue;
    const bool is_signed = table.size_at(o) == 1 && table.is_signed_at(o);
    out.push_back({o, 1, is_signed});
  }
  std::sort(out.begin(), out.end(), [](const ValueShape &a, const ValueShape &b) {
    return a.offset < b.offset;
  });
  return out;
}

// All offsets as independent unsigned bytes (no shape information).
inline std::vector<ValueShape> ByteShapes(const BitVector &offsets) {
  std::vector<ValueShape> out;
  for (std::size_t o : offsets.offsets()) out.push_back({o, 1, false});
  return out;
}

}  // namespace gradfuzz

#endif  // GRADFUZZ_SHAPE_INFER_HPP_
