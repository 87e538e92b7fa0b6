/*
 * Copyright 2026 The SSML Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "ssml/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>
#include <utility>

#include "ssml/error.hpp"

namespace ssml::diff {

std::size_t NumElements(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string ShapeString(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor Tensor::Zeros(Shape shape, bool requires_grad) {
  return Full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::Full(Shape shape, double value, bool requires_grad) {
  std::vector<double> data(NumElements(shape), value);
  return FromData(std::move(shape), std::move(data), requires_grad);
}

Tensor Tensor::FromData(Shape shape, std::vector<double> data,
                        bool requires_grad) {
  for (std::size_t d : shape) {
    if (d == 0) Fail(ErrorCode::kInvalidShape, "zero extent in shape ", ShapeString(shape));
  }
  if (NumElements(shape) != data.size()) {
    Fail(ErrorCode::kInvalidShape, "shape ", ShapeString(shape), " needs ",
         NumElements(shape), " values, got ", data.size());
  }
  for (double v : data) {
    if (!std::isfinite(v)) Fail(ErrorCode::kNumeric, "non-finite tensor value");
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(data);
  node->requires_grad = requires_grad;
  return Wrap(std::move(node));
}

Tensor Tensor::Scalar(double value, bool requires_grad) {
  return FromData({}, {value}, requires_grad);
}

double Tensor::item() const {
  if (size() != 1) {
    Fail(ErrorCode::kInvalidShape, "item() on tensor of shape ", ShapeString(shape()));
  }
  return node_->value[0];
}

std::span<double> Tensor::mutable_grad() {
  if (node_->grad.empty()) node_->grad.assign(node_->value.size(), 0.0);
  return node_->grad;
}

void Tensor::ZeroGrad() { node_->grad.clear(); }

Tensor Tensor::Detach(bool requires_grad) const {
  return FromData(shape(), node_->value, requires_grad);
}

namespace {
thread_local bool grad_enabled = true;
}  // namespace

NoGradGuard::NoGradGuard() : previous_(grad_enabled) { grad_enabled = false; }
NoGradGuard::~NoGradGuard() { grad_enabled = previous_; }

bool GradEnabled() { return grad_enabled; }

void Backward(const Tensor& root) {
  if (!root.defined() || root.size() != 1) {
    Fail(ErrorCode::kInvalidInput, "backward needs a scalar root");
  }
  if (!root.requires_grad()) return;

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  visited.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* node : order) {
    if (!node->is_leaf) {
      node->grad.assign(node->value.size(), 0.0);
    } else if (node->grad.empty()) {
      node->grad.assign(node->value.size(), 0.0);
    }
  }
  Node* top = root.node().get();
  top->grad[0] += 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backward) node->backward(*node);
  }

  for (Node* node : order) {
    if (!node->is_leaf) continue;
    for (double g : node->grad) {
      if (!std::isfinite(g)) Fail(ErrorCode::kNumeric, "non-finite gradient");
    }
  }
}

}  // namespace ssml::diff
