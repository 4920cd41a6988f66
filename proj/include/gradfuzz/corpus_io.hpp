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

// On-disk corpus layout:
//
//   <out>/queue/id_000000        raw input bytes
//   <out>/queue/id_000000.json   sidecar metadata
//   <out>/crashes/id_000000      first input of each crash bin
//   <out>/crashes/id_000000.json

#ifndef GRADFUZZ_CORPUS_IO_HPP_
#define GRADFUZZ_CORPUS_IO_HPP_

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "gradfuzz/engine.hpp"
#include "gradfuzz/input_buffer.hpp"
#include "gradfuzz/json_io.hpp"

namespace gradfuzz {

namespace fs = std::filesystem;

inline Bytes ReadFileBytes(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void WriteFileBytes(const fs::path &p, const Bytes &bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

inline void WriteFileText(const fs::path &p, const std::string &text) {
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

inline std::string EntryName(uint64_t id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "id_%06llu", static_cast<unsigned long long>(id));
  return buf;
}

// Seed files of a directory in name order. A "<name>.json" next to a file
// "<name>" is treated as its sidecar and skipped.
inline std::vector<Bytes> ReadSeedDir(const fs::path &dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("seed dir not found: " + dir.string());
  std::vector<fs::path> files;
  std::set<std::string> names;
  for (const auto &e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) {
      files.push_back(e.path());
      names.insert(e.path().filename().string());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<Bytes> seeds;
  for (const fs::path &f : files) {
    const std::string name = f.filename().string();
    if (f.extension() == ".json" && names.contains(f.stem().string())) continue;
    seeds.push_back(ReadFileBytes(f));
  }
  return seeds;
}

class CorpusWriter {
 public:
  explicit CorpusWriter(fs::path out) : out_(std::move(out)) {
    std::error_code ec;
    fs::create_directories(out_ / "queue", ec);
    fs::create_directories(out_ / "crashes", ec);
    if (ec || !fs::is_directory(out_ / "queue") || !fs::is_directory(out_ / "crashes")) {
      throw std::runtime_error("cannot create output dir " + out_.string());
    }
  }

  void WriteEntry(const CorpusEntry &e) {
    const fs::path base = out_ / "queue" / EntryName(e.id);
    WriteFileBytes(base, e.input.bytes);
    WriteFileText(base.string() + ".json", CorpusMeta(e).dump(2) + "\n");
  }

  void WriteCrash(const CrashBin &b) {
    const fs::path base = out_ / "crashes" / EntryName(b.id);
    WriteFileBytes(base, b.input.bytes);
    WriteFileText(base.string() + ".json", CrashMeta(b).dump(2) + "\n");
  }

  EngineObserver Observer() {
    EngineObserver o;
    o.on_admit = [this](const CorpusEntry &e) { WriteEntry(e); };
    o.on_new_crash = [this](const CrashBin &b) { WriteCrash(b); };
    return o;
  }

  const fs::path &root() const { return out_; }

 private:
  fs::path out_;
};

}  // namespace gradfuzz

#endif  // GRADFUZZ_CORPUS_IO_HPP_
