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

#ifndef GRADFUZZ_INPUT_BUFFER_HPP_
#define GRADFUZZ_INPUT_BUFFER_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gradfuzz {

using Bytes = std::vector<uint8_t>;

// A candidate input plus where it came from.
struct InputBuffer {
  Bytes bytes;
  std::optional<uint64_t> parent;  // corpus id of the input it was derived from
  std::string origin = "seed";     // seed | gradient | length | random
  // Length of the parent before the input was grown, when it was.
  std::optional<std::size_t> extended_from;

  std::size_t size() const { return bytes.size(); }
};

}  // namespace gradfuzz

#endif  // GRADFUZZ_INPUT_BUFFER_HPP_
