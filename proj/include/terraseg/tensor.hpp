#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "terraseg/error.hpp"

namespace terraseg {

// Dense shape, rank 1..4. Rank-4 tensors follow batch x channels x height x
// width with row-major (w fastest) layout.
struct Shape {
  std::array<int64_t, 4> dims{1, 1, 1, 1};
  int rank = 0;

  Shape() = default;
  Shape(std::initializer_list<int64_t> d) {
    if (d.size() == 0 || d.size() > 4) fail(ErrorCode::ShapeMismatch, "shape rank must be 1..4");
    rank = static_cast<int>(d.size());
    int i = 0;
    for (int64_t v : d) dims[static_cast<size_t>(i++)] = v;
  }

  int64_t numel() const {
    int64_t n = 1;
    for (int i = 0; i < rank; ++i) n *= dims[static_cast<size_t>(i)];
    return n;
  }

  int64_t operator[](int i) const { return dims[static_cast<size_t>(i)]; }

  bool operator==(const Shape& o) const {
    if (rank != o.rank) return false;
    for (int i = 0; i < rank; ++i)
      if (dims[static_cast<size_t>(i)] != o.dims[static_cast<size_t>(i)]) return false;
    return true;
  }
  bool operator!=(const Shape& o) const { return !(*this == o); }

  std::string str() const {
    std::string s = "[";
    for (int i = 0; i < rank; ++i) {
      if (i) s += "x";
      s += std::to_string(dims[static_cast<size_t>(i)]);
    }
    return s + "]";
  }
};

// Reverse-mode autodiff node. Nodes are created by the free-function ops and
// linked into a tape; Tensor is a cheap shared handle over one node.
template <typename T>
struct TensorNode {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;  // lazily allocated, same length as value
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backward_fn;

  void ensure_grad() {
    if (grad.empty()) grad.assign(value.size(), T{0});
  }
};

// Disables graph construction in a scope (inference / metric evaluation).
class NoGradGuard {
 public:
  NoGradGuard() : previous_(enabled_ref()) { enabled_ref() = false; }
  ~NoGradGuard() { enabled_ref() = previous_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

  static bool grad_enabled() { return enabled_ref(); }

 private:
  static bool& enabled_ref() {
    thread_local bool enabled = true;
    return enabled;
  }
  bool previous_;
};

template <typename T>
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(const Shape& shape) {
    auto node = std::make_shared<TensorNode<T>>();
    node->shape = shape;
    node->value.assign(static_cast<size_t>(shape.numel()), T{0});
    return Tensor(std::move(node));
  }

  static Tensor from_data(const Shape& shape, std::vector<T> data) {
    if (static_cast<int64_t>(data.size()) != shape.numel())
      fail(ErrorCode::ShapeMismatch, "tensor data length " + std::to_string(data.size()) +
                                         " does not match shape " + shape.str());
    auto node = std::make_shared<TensorNode<T>>();
    node->shape = shape;
    node->value = std::move(data);
    return Tensor(std::move(node));
  }

  // Trainable leaf.
  static Tensor param(const Shape& shape, std::vector<T> data) {
    Tensor t = from_data(shape, std::move(data));
    t.node_->requires_grad = true;
    return t;
  }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  int64_t numel() const { return node_->shape.numel(); }
  bool requires_grad() const { return node_->requires_grad; }

  std::span<T> values() { return node_->value; }
  std::span<const T> values() const { return node_->value; }
  std::span<T> grads() {
    node_->ensure_grad();
    return node_->grad;
  }
  std::span<const T> grads() const {
    node_->ensure_grad();
    return node_->grad;
  }

  T item() const {
    if (numel() != 1) fail(ErrorCode::ShapeMismatch, "item() on non-scalar " + shape().str());
    return node_->value[0];
  }

  void zero_grad() {
    if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), T{0});
  }

  // Backpropagates d(self)/d(leaf) into every reachable leaf with
  // requires_grad. Self must be scalar; leaf grads accumulate.
  void backward() {
    if (numel() != 1) fail(ErrorCode::ShapeMismatch, "backward() needs a scalar loss");
    std::vector<TensorNode<T>*> order;
    topo_order(order);
    node_->ensure_grad();
    node_->grad[0] += T{1};
    for (auto it = order.rbegin(); it != order.rend(); ++it)
      if ((*it)->backward_fn) (*it)->backward_fn(**it);
  }

  std::shared_ptr<TensorNode<T>>& node() { return node_; }
  const std::shared_ptr<TensorNode<T>>& node() const { return node_; }

  explicit Tensor(std::shared_ptr<TensorNode<T>> node) : node_(std::move(node)) {}

 private:
  void topo_order(std::vector<TensorNode<T>*>& order) const {
    // iterative post-order DFS: parents precede the node that uses them
    std::unordered_set<TensorNode<T>*> visited;
    std::vector<std::pair<TensorNode<T>*, size_t>> stack;
    stack.emplace_back(node_.get(), 0);
    visited.insert(node_.get());
    while (!stack.empty()) {
      auto& [node, next_parent] = stack.back();
      if (next_parent < node->parents.size()) {
        TensorNode<T>* parent = node->parents[next_parent++].get();
        if (parent->requires_grad && visited.insert(parent).second)
          stack.emplace_back(parent, 0);
      } else {
        order.push_back(node);
        stack.pop_back();
      }
    }
  }

  std::shared_ptr<TensorNode<T>> node_;
};

// True when the produced node should be wired into the tape.
template <typename T>
bool track_grad(std::initializer_list<const Tensor<T>*> inputs) {
  if (!NoGradGuard::grad_enabled()) return false;
  for (const Tensor<T>* t : inputs)
    if ((*t).requires_grad()) return true;
  return false;
}

}  // namespace terraseg
