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

#include "relpcnn/diff/adam.h"

#include <cmath>

namespace relpcnn::diff {

template <typename T>
void adam_step(const std::vector<ParamRef<T>> &params, AdamState<T> &state) {
  for (const ParamRef<T> &p : params) {
    if (p.tensor == nullptr || !p.tensor->has_grad()) {
      throw ConfigError("adam_step: parameter '" + p.name + "' has no gradient");
    }
  }
  if (state.m.empty()) {
    for (const ParamRef<T> &p : params) {
      state.m.emplace_back(p.tensor->size(), T(0));
      state.v.emplace_back(p.tensor->size(), T(0));
    }
  }
  if (state.m.size() != params.size()) {
    throw ConfigError("adam_step: optimizer state tracks " +
                      std::to_string(state.m.size()) + " parameters, got " +
                      std::to_string(params.size()));
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const T b1 = static_cast<T>(state.beta1);
  const T b2 = static_cast<T>(state.beta2);
  const T correction1 = static_cast<T>(1.0 - std::pow(state.beta1, t));
  const T correction2 = static_cast<T>(1.0 - std::pow(state.beta2, t));
  const T lr = static_cast<T>(state.learning_rate);
  const T eps = static_cast<T>(state.epsilon);

  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor<T> &param = *params[i].tensor;
    if (state.m[i].size() != param.size()) {
      throw ConfigError("adam_step: parameter '" + params[i].name +
                        "' changed size");
    }
    auto w = param.data();
    auto g = param.grad();
    auto &m = state.m[i];
    auto &v = state.v[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = b1 * m[j] + (T(1) - b1) * g[j];
      v[j] = b2 * v[j] + (T(1) - b2) * g[j] * g[j];
      const T m_hat = m[j] / correction1;
      const T v_hat = v[j] / correction2;
      w[j] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
    param.zero_grad();
  }
}

template void adam_step(const std::vector<ParamRef<float>> &, AdamState<float> &);
template void adam_step(const std::vector<ParamRef<double>> &,
                        AdamState<double> &);

}  // namespace relpcnn::diff
