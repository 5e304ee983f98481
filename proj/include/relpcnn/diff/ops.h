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

#ifndef RELPCNN_DIFF_OPS_H_
#define RELPCNN_DIFF_OPS_H_

#include <cstdint>
#include <random>
#include <vector>

#include "relpcnn/diff/tensor.h"

// Forward operations of the relation encoder and their reverse-mode
// counterparts. There is no tape: each *_backward reads the upstream
// gradient from the forward output's grad slot and accumulates into the
// grad slots of those inputs that have one.

namespace relpcnn::diff {

using Rng = std::mt19937_64;

enum class Mode { kTrain, kInfer };

// Zero padding split as floor((w-1)/2) on the left and the rest on the right,
// so width 4 pads 1 left and 2 right.
inline std::size_t conv_left_pad(std::size_t width) { return (width - 1) / 2; }

// input [L x d_in], filters [w x d_in x n_f], bias [n_f] -> [L x n_f].
template <typename T>
Tensor<T> conv1d_same(const Tensor<T> &input, const Tensor<T> &filters,
                      const Tensor<T> &bias);
template <typename T>
void conv1d_same_backward(const Tensor<T> &output, Tensor<T> &input,
                          Tensor<T> &filters, Tensor<T> &bias);

// Result of piecewise max pooling. `output` is filter-major: slot 3*f + s
// holds the maximum of filter f over segment s. `argmax` records the row
// each slot was taken from, or -1 for an empty segment.
template <typename T>
struct PooledFeatures {
  Tensor<T> output;
  std::vector<int> argmax;
};

// Segments are [0..a], [a+1..b], [b+1..real_length-1] with a = min(p1, p2)
// and b = max(p1, p2). Rows at or beyond real_length are never read. Empty
// segments yield 0; ties go to the first row.
template <typename T>
PooledFeatures<T> piecewise_max_pool(const Tensor<T> &features, int p1, int p2,
                                     int real_length);
template <typename T>
void piecewise_max_pool_backward(const PooledFeatures<T> &pooled,
                                 Tensor<T> &features);

template <typename T>
Tensor<T> concat(const std::vector<const Tensor<T> *> &parts, std::size_t axis);
template <typename T>
void concat_backward(const Tensor<T> &output,
                     const std::vector<Tensor<T> *> &parts, std::size_t axis);

// input [d], weights [d x k], bias [k] -> input * weights + bias.
template <typename T>
Tensor<T> affine(const Tensor<T> &input, const Tensor<T> &weights,
                 const Tensor<T> &bias);
template <typename T>
void affine_backward(const Tensor<T> &output, Tensor<T> &input,
                     Tensor<T> &weights, Tensor<T> &bias);

template <typename T>
Tensor<T> tanh_activation(const Tensor<T> &x);
template <typename T>
void tanh_activation_backward(const Tensor<T> &output, Tensor<T> &x);

// Inverted dropout. `scale` holds 1/keep_prob for kept entries and 0 for
// dropped ones; in inference mode it is all ones.
template <typename T>
struct Dropped {
  Tensor<T> output;
  std::vector<T> scale;
};

template <typename T>
Dropped<T> dropout(const Tensor<T> &x, double keep_prob, Mode mode, Rng &rng);
template <typename T>
void dropout_backward(const Dropped<T> &dropped, Tensor<T> &x);

template <typename T>
Tensor<T> softmax(const Tensor<T> &logits);

template <typename T>
struct LossAndGrad {
  T loss;
  Tensor<T> grad_logits;
};

// -log softmax(logits)[label] with max subtraction.
template <typename T>
LossAndGrad<T> softmax_cross_entropy(const Tensor<T> &logits, int label);

}  // namespace relpcnn::diff

#endif  // RELPCNN_DIFF_OPS_H_
