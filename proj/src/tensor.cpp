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

#include "wearseg/tensor.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

namespace wearseg {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

template <typename T>
void check_finite(std::span<const T> values, const char* where) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      std::ostringstream os;
      os << "non-finite value " << values[i] << " at flat index " << i << " in " << where;
      throw NumericError(os.str());
    }
  }
}

namespace {
void validate_shape(const Shape& shape) {
  if (shape.empty()) throw ConfigError("tensor shape must have at least one extent");
  for (auto e : shape)
    if (e == 0) throw ConfigError("tensor extents must be positive, got " + shape_str(shape));
}
}  // namespace

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, T fill) : node_(std::make_shared<Node>()) {
  validate_shape(shape);
  node_->data.assign(shape_numel(shape), fill);
  node_->shape = std::move(shape);
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, std::vector<T> data) : node_(std::make_shared<Node>()) {
  validate_shape(shape);
  if (shape_numel(shape) != data.size())
    throw ConfigError("tensor data length " + std::to_string(data.size()) +
                      " does not match shape " + shape_str(shape));
  node_->shape = std::move(shape);
  node_->data = std::move(data);
}

template <typename T>
BasicTensor<T> BasicTensor<T>::from_op(Shape shape, std::vector<T> data, const char* op,
                                       std::vector<BasicTensor> parents,
                                       std::function<void(Node&)> backward) {
  check_finite<T>(data, op);
  BasicTensor out(std::move(shape), std::move(data));
  out.node_->op = op;
  bool any = false;
  for (auto& p : parents) any = any || p.requires_grad();
  if (any) {
    out.node_->requires_grad = true;
    for (auto& p : parents) out.node_->parents.push_back(p.node_);
    out.node_->backward = std::move(backward);
  }
  return out;
}

template <typename T>
T BasicTensor<T>::item() const {
  if (numel() != 1) throw ConfigError("item() on tensor of shape " + shape_str(shape()));
  return node_->data[0];
}

template <typename T>
BasicTensor<T> BasicTensor<T>::detach() const {
  return BasicTensor(node_->shape, node_->data);
}

template <typename T>
void BasicTensor<T>::backward() {
  if (numel() != 1) throw ConfigError("backward() needs a scalar, got " + shape_str(shape()));
  if (!requires_grad()) throw ConfigError("backward() on a tensor that does not require grad");

  // Iterative post-order DFS gives a topological order without recursion
  // depth limits on long tapes.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node* p = n->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  node_->grad_buffer()[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (!n->backward || n->grad.empty()) continue;
    check_finite<T>(n->grad, n->op);
    n->backward(*n);
  }
  for (Node* n : order)
    if (n->parents.empty() && !n->grad.empty()) check_finite<T>(n->grad, "leaf gradient");
}

template class BasicTensor<float>;
template class BasicTensor<double>;
template void check_finite<float>(std::span<const float>, const char*);
template void check_finite<double>(std::span<const double>, const char*);

}  // namespace wearseg
