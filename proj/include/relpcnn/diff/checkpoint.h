// Copyright 2026 The relpcnn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RELPCNN_DIFF_CHECKPOINT_H_
#define RELPCNN_DIFF_CHECKPOINT_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "relpcnn/diff/tensor.h"

namespace relpcnn::diff {

// Binary parameter container:
//
//   magic "RPCNNCKP" | u32 version | u32 byte-order mark | u32 scalar bytes
//   u64 metadata length | metadata (UTF-8 JSON)
//   u32 tensor count, then per tensor:
//     u32 name length | name | u32 rank | u64 dims[rank] | raw scalars
//
// Scalars are stored as host bytes; the byte-order mark rejects files from a
// machine of the other endianness. Round trips are bit-exact.
inline constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
struct NamedTensor {
  std::string name;
  Tensor<T> tensor;
};

template <typename T>
struct Checkpoint {
  std::string metadata;
  std::vector<NamedTensor<T>> tensors;

  // Throws LoadError if no tensor has this name.
  const Tensor<T> &get(const std::string &name) const;
};

template <typename T>
void write_checkpoint(std::ostream &out, const Checkpoint<T> &checkpoint);
template <typename T>
Checkpoint<T> read_checkpoint(std::istream &in);

template <typename T>
void save_checkpoint(const std::filesystem::path &path,
                     const Checkpoint<T> &checkpoint);
template <typename T>
Checkpoint<T> load_checkpoint(const std::filesystem::path &path);

}  // namespace relpcnn::diff

#endif  // RELPCNN_DIFF_CHECKPOINT_H_
