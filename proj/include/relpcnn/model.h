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

#ifndef RELPCNN_MODEL_H_
#define RELPCNN_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "relpcnn/diff/adam.h"
#include "relpcnn/diff/ops.h"
#include "relpcnn/diff/tensor.h"
#include "relpcnn/embeddings.h"
#include "relpcnn/labels.h"
#include "relpcnn/preprocess.h"
#include "relpcnn/vocabulary.h"

namespace relpcnn {

enum class Nonlinearity { kTanh, kNone };

struct ModelConfig {
  std::vector<int> filter_widths = {3, 4, 5};
  int n_filters = 64;  // per width
  int pos_dim = 5;
  int dir_dim = 5;
  int n_classes = kNumRelations;
  double keep_prob = 0.5;
  int max_seq_len = 200;
  int position_window = 30;
  Nonlinearity nonlinearity = Nonlinearity::kTanh;
  bool fine_tune_words = true;

  // Width of the sentence representation fed to the classifier.
  std::size_t rep_dim() const {
    return 3 * filter_widths.size() * static_cast<std::size_t>(n_filters) +
           static_cast<std::size_t>(dir_dim);
  }

  void validate(std::vector<std::string> *errors) const;

  bool operator==(const ModelConfig &) const = default;
};

std::string model_config_to_json(const ModelConfig &cfg);
ModelConfig model_config_from_json(const std::string &text);

// Derives an independent stream seed from a base seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

template <typename T>
struct ModelParams {
  EmbeddingTable<T> words;
  EmbeddingTable<T> pos1;
  EmbeddingTable<T> pos2;
  EmbeddingTable<T> dir;
  std::vector<diff::Tensor<T>> filters;  // per width: [w x d_in x n_filters]
  std::vector<diff::Tensor<T>> biases;   // per width: [n_filters]
  diff::Tensor<T> weights;               // [rep_dim x n_classes]
  diff::Tensor<T> bias;                  // [n_classes]

  // Every parameter with a stable name, in a fixed order.
  std::vector<diff::ParamRef<T>> named();
  // The parameters the optimizer updates; excludes frozen word vectors.
  std::vector<diff::ParamRef<T>> trainable();
  // Allocates gradient slots on trainable parameters.
  void enable_grads();
  void zero_grads();

  template <typename U>
  ModelParams<U> cast() const;
};

// Random initialization around the given word table. Filters and the
// classifier use Glorot-uniform ranges, biases start at zero.
template <typename T>
ModelParams<T> init_params(const ModelConfig &cfg, EmbeddingTable<T> words,
                           std::uint64_t seed);

// Throws ShapeError if any parameter disagrees with the configuration.
template <typename T>
void check_params(const ModelParams<T> &params, const ModelConfig &cfg);

// Intermediates kept by forward() for backward().
template <typename T>
struct ForwardCache {
  diff::Tensor<T> word_rows;  // [real_length x d_w]
  diff::Tensor<T> pos1_rows;  // [real_length x pos_dim]
  diff::Tensor<T> pos2_rows;
  diff::Tensor<T> input;  // [real_length x d_w + 2 pos_dim]
  std::vector<diff::Tensor<T>> conv;
  std::vector<diff::PooledFeatures<T>> pooled;
  diff::Tensor<T> dir_row;  // [dir_dim]
  diff::Tensor<T> rep;      // [rep_dim]
  diff::Tensor<T> activated;
  diff::Dropped<T> dropped;
  diff::Tensor<T> logits;  // [n_classes]
};

// Runs the encoder and classifier. Rows at or beyond real_length are not
// part of the encoder input; the convolution treats them as its zero
// padding.
template <typename T>
ForwardCache<T> forward(const RelationInstance &instance,
                        const ModelParams<T> &params, const ModelConfig &cfg,
                        diff::Mode mode, diff::Rng &rng);

// Accumulates d(loss)/d(params) given d(loss)/d(logits).
template <typename T>
void backward(ForwardCache<T> &cache, std::span<const T> grad_logits,
              const RelationInstance &instance, ModelParams<T> &params,
              const ModelConfig &cfg);

// Mean cross-entropy over the batch in training mode. Zeroes and then fills
// the parameter gradients with the exact batch mean. Throws NumericError
// for a non-finite loss.
template <typename T>
double loss_and_grads(std::span<const RelationInstance> batch,
                      ModelParams<T> &params, const ModelConfig &cfg,
                      diff::Rng &rng);

// Mean cross-entropy in inference mode; parameters are untouched.
template <typename T>
double mean_loss(std::span<const RelationInstance> batch,
                 const ModelParams<T> &params, const ModelConfig &cfg);

struct Prediction {
  Relation label;
  std::vector<double> probabilities;
};

// Argmax of the inference-mode logits, lowest class index on ties.
template <typename T>
Prediction predict(const RelationInstance &instance, const ModelParams<T> &params,
                   const ModelConfig &cfg);

// Everything needed to run a trained model on new text.
struct SavedModel {
  ModelConfig model;
  PreprocessConfig preprocess;
  Vocabulary vocab;
  ModelParams<float> params;
};

void save_model(const std::filesystem::path &path, const SavedModel &model);
SavedModel load_model(const std::filesystem::path &path);

}  // namespace relpcnn

#endif  // RELPCNN_MODEL_H_
