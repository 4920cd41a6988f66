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

// Input length exploration. Read-like calls in a target are served from an
// input stream; the count each call returns carries a tag naming the call.
// When a conditional on that count is unsatisfied, the input is grown to the
// length at which the call would have received everything it asked for.

#ifndef GRADFUZZ_LENGTH_EXPLORE_HPP_
#define GRADFUZZ_LENGTH_EXPLORE_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gradfuzz/constraints.hpp"
#include "gradfuzz/input_buffer.hpp"

namespace gradfuzz {

inline constexpr std::size_t kDefaultMaxInputLength = std::size_t{1} << 20;

struct ReadRecord {
  uint32_t index = 0;       // tag carried by the returned count
  std::size_t offset = 0;   // stream position at the call
  std::size_t requested = 0;
  std::size_t returned = 0;  // <= requested
};

class InputStream {
 public:
  explicit InputStream(std::span<const uint8_t> input) : input_(input) {}

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return input_.size() - pos_; }

  // Consumes min(requested, remaining) bytes. The returned record's
  // [offset, offset + returned) is the range of input offsets delivered.
  ReadRecord Read(std::size_t requested, uint32_t index) {
    ReadRecord r;
    r.index = index;
    r.offset = pos_;
    r.requested = requested;
    r.returned = std::min(requested, remaining());
    pos_ += r.returned;
    return r;
  }

 private:
  std::span<const uint8_t> input_;
  std::size_t pos_ = 0;
};

// Input length at which the read feeding `stmt` would be fully satisfied, or
// nothing if no read count flows into the statement or the wanted direction
// already holds.
inline std::optional<std::size_t> LengthRequirement(
    const CondStmtRecord &stmt, bool direction,
    const std::vector<ReadRecord> &reads) {
  if (!stmt.length_source) return std::nullopt;
  if (Satisfied(stmt.ForDirection(direction))) return std::nullopt;
  for (const ReadRecord &r : reads) {
    if (r.index == *stmt.length_source) return r.offset + r.requested;
  }
  return std::nullopt;
}

struct ExtendOptions {
  uint8_t filler = 0x00;
  std::size_t max_length = kDefaultMaxInputLength;
};

// Pads `input` with filler bytes up to `to_length` (capped at max_length).
// Existing bytes are never modified; already-long inputs come back as is.
inline InputBuffer Extend(const InputBuffer &input, std::size_t to_length,
                          const ExtendOptions &opts = {}) {
  InputBuffer out = input;
  const std::size_t target = std::min(to_length, opts.max_length);
  if (target <= input.size()) return out;
  out.extended_from = input.size();
  out.bytes.resize(target, opts.filler);
  return out;
}

}  // namespace gradfuzz

#endif  // GRADFUZZ_LENGTH_EXPLORE_HPP_
