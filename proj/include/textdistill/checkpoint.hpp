// Copyright 2026 The textdistill Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace textdistill {

// On-disk layout, all integers and floats little-endian:
//
//   "FLITCKPT"                   8-byte magic
//   u32 version                  (kCheckpointVersion)
//   u32 tensor count
//   per tensor:
//     u32 name length, UTF-8 name bytes
//     u32 rank, u32 dims[rank]
//     f32 values[product(dims)]
inline constexpr char kCheckpointMagic[8] = {'F', 'L', 'I', 'T', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointEntry {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> values;
};

void write_checkpoint(const std::filesystem::path& path,
                      const std::vector<CheckpointEntry>& entries);
std::vector<CheckpointEntry> read_checkpoint(const std::filesystem::path& path);

std::string encode_checkpoint(const std::vector<CheckpointEntry>& entries);
std::vector<CheckpointEntry> decode_checkpoint(const std::string& bytes);

}  // namespace textdistill
