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

#ifndef RELPCNN_DIFF_TENSOR_H_
#define RELPCNN_DIFF_TENSOR_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "relpcnn/errors.h"

namespace relpcnn::diff {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape &shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

inline std::string shape_string(const Shape &shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += " x ";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

// Dense row-major array with an optional gradient slot of the same shape.
// Copyable and movable; a copy owns its own data and gradient.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  explicit Tensor(Shape shape, T fill = T(0))
      : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

  Tensor(Shape shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_size(shape_)) {
      throw ShapeError("tensor data of length " + std::to_string(data_.size()) +
                       " does not fill shape " + diff::shape_string(shape_));
    }
  }

  const Shape &shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  std::string shape_string() const { return diff::shape_string(shape_); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  T &operator[](std::size_t i) { return data_[i]; }
  const T &operator[](std::size_t i) const { return data_[i]; }

  // Element access for rank-2 tensors.
  T &at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  const T &at(std::size_t r, std::size_t c) const {
    return data_[r * shape_[1] + c];
  }

  // The contiguous slice addressed by the leading index.
  std::span<T> row(std::size_t r) {
    const std::size_t width = data_.size() / shape_[0];
    return std::span<T>(data_).subspan(r * width, width);
  }
  std::span<const T> row(std::size_t r) const {
    const std::size_t width = data_.size() / shape_[0];
    return std::span<const T>(data_).subspan(r * width, width);
  }

  bool has_grad() const { return has_grad_; }

  // Allocates a zero gradient if none is present.
  void ensure_grad() {
    if (!has_grad_) {
      grad_.assign(data_.size(), T(0));
      has_grad_ = true;
    }
  }
  void zero_grad() {
    if (has_grad_) std::fill(grad_.begin(), grad_.end(), T(0));
  }
  void drop_grad() {
    grad_.clear();
    grad_.shrink_to_fit();
    has_grad_ = false;
  }

  std::span<T> grad() { return grad_; }
  std::span<const T> grad() const { return grad_; }

  // Throws NumericError if any element is NaN or infinite.
  void check_finite(std::string_view what) const {
    for (std::size_t i = 0; i < data_.size(); ++i) {
      if (!std::isfinite(data_[i])) {
        throw NumericError(std::string(what) + ": non-finite value at index " +
                           std::to_string(i));
      }
    }
  }

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Tensor<U>(shape_, std::move(out));
  }

  // Compares shape and values; gradients are ignored.
  bool operator==(const Tensor &other) const {
    return shape_ == other.shape_ && data_ == other.data_;
  }

 private:
  Shape shape_;
  std::vector<T> data_;
  std::vector<T> grad_;
  bool has_grad_ = false;
};

}  // namespace relpcnn::diff

#endif  // RELPCNN_DIFF_TENSOR_H_
