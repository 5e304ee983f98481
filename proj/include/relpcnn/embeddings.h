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

#ifndef RELPCNN_EMBEDDINGS_H_
#define RELPCNN_EMBEDDINGS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>

#include "relpcnn/diff/tensor.h"
#include "relpcnn/vocabulary.h"

namespace relpcnn {

// Rows not loaded from a file (UNK, positions, directions) are drawn from
// U(-kInitRange, kInitRange).
inline constexpr double kInitRange = 0.1;

template <typename T>
struct EmbeddingTable {
  diff::Tensor<T> matrix;  // [rows x dim]
  bool trainable = true;
  // Row whose gradient is always discarded (the PAD row of the word table).
  int frozen_row = -1;

  std::size_t rows() const { return matrix.dim(0); }
  std::size_t dim() const { return matrix.dim(1); }

  template <typename U>
  EmbeddingTable<U> cast() const {
    return EmbeddingTable<U>{matrix.template cast<U>(), trainable, frozen_row};
  }
};

struct PretrainedEmbeddings {
  Vocabulary vocab;
  EmbeddingTable<float> table;
};

struct LoadOptions {
  // Keep only the first N vectors of the file.
  std::optional<std::size_t> vocab_limit;
  // When set, vectors for other tokens are skipped.
  const std::unordered_set<std::string> *restrict_to = nullptr;
  std::uint64_t seed = 1;
  bool trainable = true;
};

// Reads the text vector format: an optional "count dim" header, then one
// token followed by dim floats per line. PAD gets a zero, frozen row and UNK
// a random row. Throws LoadError on empty input or inconsistent dimensions.
PretrainedEmbeddings parse_pretrained(std::string_view text,
                                      const LoadOptions &options);
PretrainedEmbeddings load_pretrained(const std::filesystem::path &path,
                                     const LoadOptions &options);

// Row d + window holds the embedding of clipped distance d.
inline int position_row(int distance, int window) { return distance + window; }

template <typename T>
EmbeddingTable<T> position_table(int window, int dim, std::uint64_t seed);

// Row 0 is FORWARD, row 1 is REVERSE.
template <typename T>
EmbeddingTable<T> direction_table(int dim, std::uint64_t seed);

template <typename T>
EmbeddingTable<T> random_table(std::size_t rows, std::size_t dim,
                               std::uint64_t seed);

// Gathers rows: output[i] = matrix[ids[i]]. Throws ShapeError on an id out
// of range.
template <typename T>
diff::Tensor<T> lookup(const EmbeddingTable<T> &table, std::span<const int> ids);

// Scatters output.grad() back into the table's gradient, summing over
// repeated ids. No-op for tables without a gradient slot.
template <typename T>
void lookup_backward(const diff::Tensor<T> &output, EmbeddingTable<T> &table,
                     std::span<const int> ids);

}  // namespace relpcnn

#endif  // RELPCNN_EMBEDDINGS_H_
