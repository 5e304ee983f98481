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

#ifndef RELPCNN_DIFF_ADAM_H_
#define RELPCNN_DIFF_ADAM_H_

#include <cstdint>
#include <string>
#include <vector>

#include "relpcnn/diff/tensor.h"

namespace relpcnn::diff {

template <typename T>
struct ParamRef {
  std::string name;
  Tensor<T> *tensor = nullptr;
};

// Optimizer state. Moment buffers are allocated on the first step and are
// matched to parameters by position.
template <typename T>
struct AdamState {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  std::vector<std::vector<T>> m;
  std::vector<std::vector<T>> v;
};

// One bias-corrected Adam update over every parameter, then zeroes the
// gradients. Throws ConfigError when a parameter has no gradient slot.
template <typename T>
void adam_step(const std::vector<ParamRef<T>> &params, AdamState<T> &state);

}  // namespace relpcnn::diff

#endif  // RELPCNN_DIFF_ADAM_H_
