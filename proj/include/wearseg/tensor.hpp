// Copyright 2026 The wearseg Authors. All Rights Reserved.
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

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "wearseg/error.hpp"

namespace wearseg {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Dense row-major array that can take part in reverse-mode differentiation.
///
/// A tensor is a cheap handle onto a shared node. Ops never modify the values
/// of their inputs; the only in-place writers are optimizers updating leaf
/// parameters between steps. When any input of an op requires a gradient the
/// result records its parents and a backward closure, forming the tape that
/// backward() walks in reverse topological order.
template <typename T>
class BasicTensor {
 public:
  struct Node {
    Shape shape;
    std::vector<T> data;
    std::vector<T> grad;  // empty until something is accumulated
    bool requires_grad = false;
    const char* op = "leaf";
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward;

    /// Gradient buffer, zero-initialised on first use.
    std::vector<T>& grad_buffer() {
      if (grad.empty()) grad.assign(data.size(), T(0));
      return grad;
    }
  };
  using NodePtr = std::shared_ptr<Node>;

  BasicTensor() = default;
  explicit BasicTensor(Shape shape, T fill = T(0));
  BasicTensor(Shape shape, std::vector<T> data);

  static BasicTensor zeros(Shape shape) { return BasicTensor(std::move(shape)); }
  static BasicTensor full(Shape shape, T value) { return BasicTensor(std::move(shape), value); }

  /// Result of an op. Parents that do not require gradients are dropped, and
  /// if none remain the tensor is recorded as a constant.
  static BasicTensor from_op(Shape shape, std::vector<T> data, const char* op,
                             std::vector<BasicTensor> parents,
                             std::function<void(Node&)> backward);

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const { return node_->shape; }
  std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t numel() const { return node_->data.size(); }

  std::span<const T> data() const { return node_->data; }
  std::span<T> mutable_data() { return node_->data; }
  T item() const;

  T& operator[](std::size_t i) { return node_->data[i]; }
  const T& operator[](std::size_t i) const { return node_->data[i]; }
  /// 4-D accessor for N x C x H x W tensors.
  const T& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    const auto& s = node_->shape;
    return node_->data[((n * s[1] + c) * s[2] + h) * s[3] + w];
  }

  bool requires_grad() const { return node_->requires_grad; }
  BasicTensor& set_requires_grad(bool on = true) {
    node_->requires_grad = on;
    return *this;
  }
  bool has_grad() const { return !node_->grad.empty(); }
  /// Empty span when no gradient has been accumulated.
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> mutable_grad() { return node_->grad_buffer(); }
  void zero_grad() { node_->grad.clear(); }

  /// Backpropagates from a single-element tensor, seeding d(self)/d(self)=1.
  void backward();

  /// Copy of the values with no tape history.
  BasicTensor detach() const;

  const NodePtr& node() const { return node_; }

 private:
  NodePtr node_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

/// Throws NumericError naming `where` if any value is NaN or Inf.
template <typename T>
void check_finite(std::span<const T> values, const char* where);

template <typename To, typename From>
BasicTensor<To> cast(const BasicTensor<From>& t) {
  std::vector<To> out(t.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<To>(t[i]);
  return BasicTensor<To>(t.shape(), std::move(out));
}

}  // namespace wearseg
