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

#include "relpcnn/embeddings.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <vector>

#include "relpcnn/corpus.h"
#include "relpcnn/errors.h"

namespace relpcnn {

namespace {

std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

template <typename N>
bool ParseNumber(std::string_view s, N *out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

void FillUniform(std::span<float> values, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> dist(-kInitRange, kInitRange);
  for (float &v : values) v = static_cast<float>(dist(rng));
}

}  // namespace

PretrainedEmbeddings parse_pretrained(std::string_view text,
                                      const LoadOptions &options) {
  std::vector<std::string> tokens;
  std::vector<float> values;
  std::size_t dim = 0;
  std::optional<std::size_t> declared_dim;
  std::size_t loaded = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;

  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto fields = SplitFields(line);
    if (fields.empty()) continue;

    std::size_t count = 0, header_dim = 0;
    if (line_no == 1 && fields.size() == 2 && ParseNumber(fields[0], &count) &&
        ParseNumber(fields[1], &header_dim)) {
      declared_dim = header_dim;
      continue;
    }
    const std::size_t line_dim = fields.size() - 1;
    if (dim == 0) {
      dim = line_dim;
      if (dim == 0) {
        throw LoadError("line " + std::to_string(line_no) + ": no vector values");
      }
      if (declared_dim && *declared_dim != dim) {
        throw LoadError("line " + std::to_string(line_no) + ": header declares " +
                        std::to_string(*declared_dim) + " dimensions, found " +
                        std::to_string(dim));
      }
    } else if (line_dim != dim) {
      throw LoadError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(dim) + " values, found " +
                      std::to_string(line_dim));
    }
    if (options.vocab_limit && loaded >= *options.vocab_limit) break;
    ++loaded;

    const std::string token(fields[0]);
    if (options.restrict_to && !options.restrict_to->count(token)) continue;
    if (token == Vocabulary::kPadToken || token == Vocabulary::kUnkToken) continue;
    const std::size_t start = values.size();
    values.resize(start + dim);
    for (std::size_t k = 0; k < dim; ++k) {
      if (!ParseNumber(fields[k + 1], &values[start + k]) ||
          !std::isfinite(values[start + k])) {
        throw LoadError("line " + std::to_string(line_no) + ": bad value '" +
                        std::string(fields[k + 1]) + "'");
      }
    }
    tokens.push_back(token);
  }
  if (dim == 0) throw LoadError("no vectors found");

  PretrainedEmbeddings out;
  std::vector<float> matrix(2 * dim, 0.0f);
  std::mt19937_64 rng(options.seed);
  FillUniform(std::span<float>(matrix).subspan(dim, dim), rng);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::size_t before = out.vocab.size();
    if (out.vocab.add(tokens[i]) != static_cast<int>(before)) continue;  // dup
    matrix.insert(matrix.end(), values.begin() + i * dim,
                  values.begin() + (i + 1) * dim);
    ++kept;
  }
  out.table.matrix = diff::Tensor<float>({kept + 2, dim}, std::move(matrix));
  out.table.trainable = options.trainable;
  out.table.frozen_row = Vocabulary::kPad;
  return out;
}

PretrainedEmbeddings load_pretrained(const std::filesystem::path &path,
                                     const LoadOptions &options) {
  const std::string text = read_file(path);
  try {
    return parse_pretrained(text, options);
  } catch (const LoadError &e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

template <typename T>
EmbeddingTable<T> random_table(std::size_t rows, std::size_t dim,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-kInitRange, kInitRange);
  diff::Tensor<T> m({rows, dim});
  for (T &v : m.data()) v = static_cast<T>(dist(rng));
  return EmbeddingTable<T>{std::move(m), true, -1};
}

template <typename T>
EmbeddingTable<T> position_table(int window, int dim, std::uint64_t seed) {
  if (window <= 0 || dim <= 0) {
    throw ConfigError("position table needs positive window and dim");
  }
  return random_table<T>(2 * window + 1, dim, seed);
}

template <typename T>
EmbeddingTable<T> direction_table(int dim, std::uint64_t seed) {
  if (dim <= 0) throw ConfigError("direction table needs positive dim");
  return random_table<T>(2, dim, seed);
}

template <typename T>
diff::Tensor<T> lookup(const EmbeddingTable<T> &table, std::span<const int> ids) {
  const std::size_t dim = table.dim();
  diff::Tensor<T> out({ids.size(), dim});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= table.rows()) {
      throw ShapeError("lookup: id " + std::to_string(ids[i]) +
                       " outside table of " + std::to_string(table.rows()) +
                       " rows");
    }
    const auto src = table.matrix.row(ids[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

template <typename T>
void lookup_backward(const diff::Tensor<T> &output, EmbeddingTable<T> &table,
                     std::span<const int> ids) {
  if (!table.matrix.has_grad()) return;
  const std::size_t dim = table.dim();
  const auto gy = output.grad();
  auto gw = table.matrix.grad();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == table.frozen_row) continue;
    T *dst = gw.data() + static_cast<std::size_t>(ids[i]) * dim;
    const T *src = gy.data() + i * dim;
    for (std::size_t k = 0; k < dim; ++k) dst[k] += src[k];
  }
}

#define RELPCNN_INSTANTIATE_EMBEDDINGS(T)                                      \
  template EmbeddingTable<T> random_table(std::size_t, std::size_t,           \
                                          std::uint64_t);                      \
  template EmbeddingTable<T> position_table(int, int, std::uint64_t);          \
  template EmbeddingTable<T> direction_table(int, std::uint64_t);              \
  template diff::Tensor<T> lookup(const EmbeddingTable<T> &,                   \
                                  std::span<const int>);                       \
  template void lookup_backward(const diff::Tensor<T> &, EmbeddingTable<T> &,  \
                                std::span<const int>);

RELPCNN_INSTANTIATE_EMBEDDINGS(float)
RELPCNN_INSTANTIATE_EMBEDDINGS(double)

#undef RELPCNN_INSTANTIATE_EMBEDDINGS

}  // namespace relpcnn
