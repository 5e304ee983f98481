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

#include "relpcnn/diff/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace relpcnn::diff {

namespace {

void ExpectRank(const Shape &shape, std::size_t rank, const char *op,
                const char *name) {
  if (shape.size() != rank) {
    throw ShapeError(std::string(op) + ": " + name + " must have rank " +
                     std::to_string(rank) + ", got " + shape_string(shape));
  }
}

[[noreturn]] void Mismatch(const char *op, const Shape &a, const Shape &b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " +
                   shape_string(a) + " and " + shape_string(b));
}

}  // namespace

template <typename T>
Tensor<T> conv1d_same(const Tensor<T> &input, const Tensor<T> &filters,
                      const Tensor<T> &bias) {
  ExpectRank(input.shape(), 2, "conv1d_same", "input");
  ExpectRank(filters.shape(), 3, "conv1d_same", "filters");
  ExpectRank(bias.shape(), 1, "conv1d_same", "bias");
  const std::size_t len = input.dim(0);
  const std::size_t d_in = input.dim(1);
  const std::size_t width = filters.dim(0);
  const std::size_t n_f = filters.dim(2);
  if (filters.dim(1) != d_in || width == 0) {
    Mismatch("conv1d_same", input.shape(), filters.shape());
  }
  if (bias.dim(0) != n_f) Mismatch("conv1d_same", filters.shape(), bias.shape());

  const std::size_t left = conv_left_pad(width);
  Tensor<T> out({len, n_f});
  const T *x = input.data().data();
  const T *w = filters.data().data();
  T *y = out.data().data();
  for (std::size_t t = 0; t < len; ++t) {
    T *yt = y + t * n_f;
    std::copy(bias.data().begin(), bias.data().end(), yt);
    for (std::size_t k = 0; k < width; ++k) {
      const std::ptrdiff_t r = static_cast<std::ptrdiff_t>(t + k) -
                               static_cast<std::ptrdiff_t>(left);
      if (r < 0 || r >= static_cast<std::ptrdiff_t>(len)) continue;
      const T *xr = x + r * d_in;
      const T *wk = w + k * d_in * n_f;
      for (std::size_t c = 0; c < d_in; ++c) {
        const T xv = xr[c];
        const T *wkc = wk + c * n_f;
        for (std::size_t f = 0; f < n_f; ++f) yt[f] += xv * wkc[f];
      }
    }
  }
  return out;
}

template <typename T>
void conv1d_same_backward(const Tensor<T> &output, Tensor<T> &input,
                          Tensor<T> &filters, Tensor<T> &bias) {
  const std::size_t len = input.dim(0);
  const std::size_t d_in = input.dim(1);
  const std::size_t width = filters.dim(0);
  const std::size_t n_f = filters.dim(2);
  const std::size_t left = conv_left_pad(width);
  const T *gy = output.grad().data();
  const T *x = input.data().data();
  const T *w = filters.data().data();

  if (bias.has_grad()) {
    T *gb = bias.grad().data();
    for (std::size_t t = 0; t < len; ++t) {
      for (std::size_t f = 0; f < n_f; ++f) gb[f] += gy[t * n_f + f];
    }
  }
  T *gw = filters.has_grad() ? filters.grad().data() : nullptr;
  T *gx = input.has_grad() ? input.grad().data() : nullptr;
  if (!gw && !gx) return;
  for (std::size_t t = 0; t < len; ++t) {
    const T *gyt = gy + t * n_f;
    for (std::size_t k = 0; k < width; ++k) {
      const std::ptrdiff_t r = static_cast<std::ptrdiff_t>(t + k) -
                               static_cast<std::ptrdiff_t>(left);
      if (r < 0 || r >= static_cast<std::ptrdiff_t>(len)) continue;
      for (std::size_t c = 0; c < d_in; ++c) {
        const std::size_t base = (k * d_in + c) * n_f;
        if (gw) {
          const T xv = x[r * d_in + c];
          T *gwkc = gw + base;
          for (std::size_t f = 0; f < n_f; ++f) gwkc[f] += xv * gyt[f];
        }
        if (gx) {
          const T *wkc = w + base;
          T acc = 0;
          for (std::size_t f = 0; f < n_f; ++f) acc += wkc[f] * gyt[f];
          gx[r * d_in + c] += acc;
        }
      }
    }
  }
}

template <typename T>
PooledFeatures<T> piecewise_max_pool(const Tensor<T> &features, int p1, int p2,
                                     int real_length) {
  ExpectRank(features.shape(), 2, "piecewise_max_pool", "features");
  const int len = static_cast<int>(features.dim(0));
  const std::size_t n_f = features.dim(1);
  if (p1 == p2) {
    throw ShapeError("piecewise_max_pool: entity positions coincide at " +
                     std::to_string(p1));
  }
  if (real_length > len || real_length <= 0) {
    throw ShapeError("piecewise_max_pool: real_length " +
                     std::to_string(real_length) + " outside [1, " +
                     std::to_string(len) + "]");
  }
  const int a = std::min(p1, p2);
  const int b = std::max(p1, p2);
  if (a < 0 || b >= real_length) {
    throw ShapeError("piecewise_max_pool: positions (" + std::to_string(p1) +
                     ", " + std::to_string(p2) + ") outside real length " +
                     std::to_string(real_length));
  }
  const int bounds[3][2] = {{0, a}, {a + 1, b}, {b + 1, real_length - 1}};

  PooledFeatures<T> pooled{Tensor<T>({3 * n_f}), std::vector<int>(3 * n_f, -1)};
  for (std::size_t f = 0; f < n_f; ++f) {
    for (int s = 0; s < 3; ++s) {
      int best = -1;
      T best_value = T(0);
      for (int r = bounds[s][0]; r <= bounds[s][1]; ++r) {
        const T v = features.at(r, f);
        if (best < 0 || v > best_value) {
          best = r;
          best_value = v;
        }
      }
      pooled.output[3 * f + s] = best_value;
      pooled.argmax[3 * f + s] = best;
    }
  }
  return pooled;
}

template <typename T>
void piecewise_max_pool_backward(const PooledFeatures<T> &pooled,
                                 Tensor<T> &features) {
  if (!features.has_grad()) return;
  const std::size_t n_f = features.dim(1);
  const auto gy = pooled.output.grad();
  auto gx = features.grad();
  for (std::size_t slot = 0; slot < pooled.argmax.size(); ++slot) {
    const int r = pooled.argmax[slot];
    if (r < 0) continue;
    gx[r * n_f + slot / 3] += gy[slot];
  }
}

template <typename T>
Tensor<T> concat(const std::vector<const Tensor<T> *> &parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const Shape &first = parts.front()->shape();
  if (axis >= first.size()) {
    throw ShapeError("concat: axis " + std::to_string(axis) +
                     " out of range for " + shape_string(first));
  }
  Shape out_shape = first;
  out_shape[axis] = 0;
  for (const Tensor<T> *p : parts) {
    const Shape &s = p->shape();
    if (s.size() != first.size()) Mismatch("concat", first, s);
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i != axis && s[i] != first[i]) Mismatch("concat", first, s);
    }
    out_shape[axis] += s[axis];
  }
  std::size_t outer = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= first[i];

  Tensor<T> out(out_shape);
  const std::size_t out_stride = out.size() / outer;
  std::size_t offset = 0;
  for (const Tensor<T> *p : parts) {
    const std::size_t block = p->size() / outer;
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(p->data().data() + o * block, block,
                  out.data().data() + o * out_stride + offset);
    }
    offset += block;
  }
  return out;
}

template <typename T>
void concat_backward(const Tensor<T> &output, const std::vector<Tensor<T> *> &parts,
                     std::size_t axis) {
  std::size_t outer = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= output.dim(i);
  const std::size_t out_stride = output.size() / outer;
  const T *gy = output.grad().data();
  std::size_t offset = 0;
  for (Tensor<T> *p : parts) {
    const std::size_t block = p->size() / outer;
    if (p->has_grad()) {
      T *gx = p->grad().data();
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t i = 0; i < block; ++i) {
          gx[o * block + i] += gy[o * out_stride + offset + i];
        }
      }
    }
    offset += block;
  }
}

template <typename T>
Tensor<T> affine(const Tensor<T> &input, const Tensor<T> &weights,
                 const Tensor<T> &bias) {
  ExpectRank(input.shape(), 1, "affine", "input");
  ExpectRank(weights.shape(), 2, "affine", "weights");
  ExpectRank(bias.shape(), 1, "affine", "bias");
  const std::size_t d = input.dim(0);
  const std::size_t k = weights.dim(1);
  if (weights.dim(0) != d) Mismatch("affine", input.shape(), weights.shape());
  if (bias.dim(0) != k) Mismatch("affine", weights.shape(), bias.shape());
  Tensor<T> out({k});
  std::copy(bias.data().begin(), bias.data().end(), out.data().begin());
  for (std::size_t i = 0; i < d; ++i) {
    const T xi = input[i];
    const auto wi = weights.row(i);
    for (std::size_t j = 0; j < k; ++j) out[j] += xi * wi[j];
  }
  return out;
}

template <typename T>
void affine_backward(const Tensor<T> &output, Tensor<T> &input,
                     Tensor<T> &weights, Tensor<T> &bias) {
  const std::size_t d = input.dim(0);
  const std::size_t k = weights.dim(1);
  const auto gy = output.grad();
  if (bias.has_grad()) {
    auto gb = bias.grad();
    for (std::size_t j = 0; j < k; ++j) gb[j] += gy[j];
  }
  if (weights.has_grad()) {
    auto gw = weights.grad();
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < k; ++j) gw[i * k + j] += input[i] * gy[j];
    }
  }
  if (input.has_grad()) {
    auto gx = input.grad();
    for (std::size_t i = 0; i < d; ++i) {
      const auto wi = weights.row(i);
      T acc = 0;
      for (std::size_t j = 0; j < k; ++j) acc += wi[j] * gy[j];
      gx[i] += acc;
    }
  }
}

template <typename T>
Tensor<T> tanh_activation(const Tensor<T> &x) {
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
  return y;
}

template <typename T>
void tanh_activation_backward(const Tensor<T> &output, Tensor<T> &x) {
  if (!x.has_grad()) return;
  const auto gy = output.grad();
  auto gx = x.grad();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T y = output[i];
    gx[i] += gy[i] * (T(1) - y * y);
  }
}

template <typename T>
Dropped<T> dropout(const Tensor<T> &x, double keep_prob, Mode mode, Rng &rng) {
  if (!(keep_prob > 0.0) || keep_prob > 1.0) {
    throw ConfigError("dropout: keep_prob must be in (0, 1], got " +
                      std::to_string(keep_prob));
  }
  Dropped<T> d{x, std::vector<T>(x.size(), T(1))};
  d.output.drop_grad();
  if (mode == Mode::kInfer || keep_prob == 1.0) return d;
  std::bernoulli_distribution keep(keep_prob);
  const T kept_scale = static_cast<T>(1.0 / keep_prob);
  for (std::size_t i = 0; i < x.size(); ++i) {
    d.scale[i] = keep(rng) ? kept_scale : T(0);
    d.output[i] = x[i] * d.scale[i];
  }
  return d;
}

template <typename T>
void dropout_backward(const Dropped<T> &dropped, Tensor<T> &x) {
  if (!x.has_grad()) return;
  const auto gy = dropped.output.grad();
  auto gx = x.grad();
  for (std::size_t i = 0; i < x.size(); ++i) gx[i] += gy[i] * dropped.scale[i];
}

template <typename T>
Tensor<T> softmax(const Tensor<T> &logits) {
  ExpectRank(logits.shape(), 1, "softmax", "logits");
  Tensor<T> p(logits.shape());
  if (logits.size() == 0) return p;
  const T max = *std::max_element(logits.data().begin(), logits.data().end());
  T total = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - max);
    total += p[i];
  }
  for (std::size_t i = 0; i < p.size(); ++i) p[i] /= total;
  return p;
}

template <typename T>
LossAndGrad<T> softmax_cross_entropy(const Tensor<T> &logits, int label) {
  ExpectRank(logits.shape(), 1, "softmax_cross_entropy", "logits");
  const int k = static_cast<int>(logits.size());
  if (label < 0 || label >= k) {
    throw ShapeError("softmax_cross_entropy: label " + std::to_string(label) +
                     " outside [0, " + std::to_string(k) + ")");
  }
  const T max = *std::max_element(logits.data().begin(), logits.data().end());
  T total = 0;
  for (int i = 0; i < k; ++i) total += std::exp(logits[i] - max);
  const T log_norm = max + std::log(total);
  LossAndGrad<T> out{log_norm - logits[label], Tensor<T>(logits.shape())};
  for (int i = 0; i < k; ++i) {
    out.grad_logits[i] = std::exp(logits[i] - log_norm);
  }
  out.grad_logits[label] -= T(1);
  return out;
}

#define RELPCNN_INSTANTIATE_OPS(T)                                            \
  template Tensor<T> conv1d_same(const Tensor<T> &, const Tensor<T> &,        \
                                 const Tensor<T> &);                          \
  template void conv1d_same_backward(const Tensor<T> &, Tensor<T> &,          \
                                     Tensor<T> &, Tensor<T> &);               \
  template PooledFeatures<T> piecewise_max_pool(const Tensor<T> &, int, int,  \
                                                int);                         \
  template void piecewise_max_pool_backward(const PooledFeatures<T> &,        \
                                            Tensor<T> &);                     \
  template Tensor<T> concat(const std::vector<const Tensor<T> *> &,           \
                            std::size_t);                                     \
  template void concat_backward(const Tensor<T> &,                            \
                                const std::vector<Tensor<T> *> &,             \
                                std::size_t);                                 \
  template Tensor<T> affine(const Tensor<T> &, const Tensor<T> &,             \
                            const Tensor<T> &);                               \
  template void affine_backward(const Tensor<T> &, Tensor<T> &, Tensor<T> &,  \
                                Tensor<T> &);                                 \
  template Tensor<T> tanh_activation(const Tensor<T> &);                      \
  template void tanh_activation_backward(const Tensor<T> &, Tensor<T> &);     \
  template Dropped<T> dropout(const Tensor<T> &, double, Mode, Rng &);        \
  template void dropout_backward(const Dropped<T> &, Tensor<T> &);            \
  template Tensor<T> softmax(const Tensor<T> &);                              \
  template LossAndGrad<T> softmax_cross_entropy(const Tensor<T> &, int);

RELPCNN_INSTANTIATE_OPS(float)
RELPCNN_INSTANTIATE_OPS(double)

#undef RELPCNN_INSTANTIATE_OPS

}  // namespace relpcnn::diff
