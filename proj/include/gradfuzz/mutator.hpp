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

// Random havoc mutations: bit/byte flips, interesting values, small
// arithmetic, random bytes, block delete/duplicate/memset, and splicing.
// Used only for branches whose predicate carries no input taint.

#ifndef GRADFUZZ_MUTATOR_HPP_
#define GRADFUZZ_MUTATOR_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>

#include "gradfuzz/input_buffer.hpp"

namespace gradfuzz {

namespace internal {

inline constexpr int8_t kInteresting8[] = {-128, -1, 0, 1, 16, 32, 64, 100, 127};
inline constexpr int16_t kInteresting16[] = {-32768, -129, 128, 255, 256, 512, 1000, 1024, 4096, 32767};
inline constexpr int32_t kInteresting32[] = {INT32_MIN, -100663046, -32769, 32768, 65535,
                                             65536, 100663045, INT32_MAX};
inline constexpr int kArithMax = 35;

template <typename Rng>
std::size_t Pick(Rng &rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline void Put(Bytes &b, std::size_t at, uint64_t v, std::size_t width) {
  for (std::size_t i = 0; i < width; ++i) b[at + i] = static_cast<uint8_t>(v >> (8 * i));
}

inline uint64_t Get(const Bytes &b, std::size_t at, std::size_t width) {
  uint64_t v = 0;
  for (std::size_t i = 0; i < width; ++i) v |= uint64_t{b[at + i]} << (8 * i);
  return v;
}

}  // namespace internal

// One stacked havoc round over `input`. `splice_with` may be empty.
template <typename Rng>
Bytes Havoc(const Bytes &input, Rng &rng, const Bytes &splice_with, std::size_t max_length) {
  using internal::Pick;
  Bytes out = input;
  const int stack = 1 << (1 + Pick(rng, 7));
  for (int s = 0; s < stack; ++s) {
    const std::size_t n = out.size();
    switch (Pick(rng, 11)) {
      case 0:  // flip a bit
        if (n > 0) out[Pick(rng, n)] ^= static_cast<uint8_t>(1u << Pick(rng, 8));
        break;
      case 1:  // interesting byte
        if (n > 0) {
          out[Pick(rng, n)] = static_cast<uint8_t>(internal::kInteresting8[Pick(rng, std::size(internal::kInteresting8))]);
        }
        break;
      case 2:  // interesting word
        if (n >= 2) {
          internal::Put(out, Pick(rng, n - 1),
                        static_cast<uint16_t>(internal::kInteresting16[Pick(rng, std::size(internal::kInteresting16))]), 2);
        }
        break;
      case 3:  // interesting dword
        if (n >= 4) {
          internal::Put(out, Pick(rng, n - 3),
                        static_cast<uint32_t>(internal::kInteresting32[Pick(rng, std::size(internal::kInteresting32))]), 4);
        }
        break;
      case 4:  // add/sub on a byte, word or dword
      {
        const std::size_t width = std::size_t{1} << Pick(rng, 3);
        if (n >= width) {
          const std::size_t at = Pick(rng, n - width + 1);
          const uint64_t delta = 1 + Pick(rng, internal::kArithMax);
          uint64_t v = internal::Get(out, at, width);
          v = Pick(rng, 2) == 0 ? v + delta : v - delta;
          internal::Put(out, at, v, width);
        }
        break;
      }
      case 5:  // random byte
        if (n > 0) out[Pick(rng, n)] ^= static_cast<uint8_t>(1 + Pick(rng, 255));
        break;
      case 6:  // delete a block
        if (n > 1) {
          const std::size_t len = 1 + Pick(rng, n - 1);
          const std::size_t at = Pick(rng, n - len + 1);
          out.erase(out.begin() + static_cast<std::ptrdiff_t>(at),
                    out.begin() + static_cast<std::ptrdiff_t>(at + len));
        }
        break;
      case 7:  // duplicate a block by insertion
        if (n > 0 && n < max_length) {
          const std::size_t len = 1 + Pick(rng, std::min(n, max_length - n));
          const std::size_t from = Pick(rng, n - len + 1);
          const std::size_t to = Pick(rng, n + 1);
          Bytes block(out.begin() + static_cast<std::ptrdiff_t>(from),
                      out.begin() + static_cast<std::ptrdiff_t>(from + len));
          out.insert(out.begin() + static_cast<std::ptrdiff_t>(to), block.begin(), block.end());
        }
        break;
      case 8:  // overwrite with a copied block
        if (n > 1) {
          const std::size_t len = 1 + Pick(rng, n - 1);
          const std::size_t from = Pick(rng, n - len + 1);
          const std::size_t to = Pick(rng, n - len + 1);
          std::copy_n(Bytes(out.begin() + static_cast<std::ptrdiff_t>(from),
                            out.begin() + static_cast<std::ptrdiff_t>(from + len)).begin(),
                      len, out.begin() + static_cast<std::ptrdiff_t>(to));
        }
        break;
      case 9:  // memset a block
        if (n > 0) {
          const std::size_t len = 1 + Pick(rng, n);
          const std::size_t at = Pick(rng, n - len + 1);
          std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(at), len,
                      static_cast<uint8_t>(Pick(rng, 256)));
        }
        break;
      case 10:  // splice: keep a prefix of ours, take the tail of the other input
        if (!splice_with.empty() && n > 0) {
          const std::size_t cut = Pick(rng, std::min(n, splice_with.size()));
          out.resize(cut);
          out.insert(out.end(), splice_with.begin() + static_cast<std::ptrdiff_t>(cut),
                     splice_with.end());
          if (out.size() > max_length) out.resize(max_length);
        }
        break;
    }
  }
  return out;
}

}  // namespace gradfuzz

#endif  // GRADFUZZ_MUTATOR_HPP_
