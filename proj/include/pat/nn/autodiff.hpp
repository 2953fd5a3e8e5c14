#pragma once

#include <functional>
#include <memory>
#include <unordered_set>
#include <vector>

#include "pat/tensor.hpp"

// Define-by-run reverse-mode differentiation. Every operation allocates a
// node holding its forward value; backward() walks the graph once in reverse
// topological order and accumulates gradients into every node that leads to
// a parameter leaf.
namespace pat::nn {

template <typename T>
struct VarNode;

template <typename T>
using Var = std::shared_ptr<VarNode<T>>;

template <typename T>
struct VarNode {
  Tensor<T> value;
  Tensor<T> grad;  // allocated on first write
  bool needs_grad = false;
  std::vector<Var<T>> parents;
  std::function<void(VarNode<T>&)> backward_fn;  // distributes this->grad

  explicit VarNode(Tensor<T> v) : value(std::move(v)) {}

  Tensor<T>& ensure_grad() {
    if (grad.numel() != value.numel()) grad = Tensor<T>(value.shape());
    return grad;
  }
  void zero_grad() {
    if (grad.numel() > 0) std::fill(grad.vec().begin(), grad.vec().end(), T(0));
  }
};

template <typename T>
Var<T> make_var(Tensor<T> value, bool requires_grad = false) {
  auto node = std::make_shared<VarNode<T>>(std::move(value));
  node->needs_grad = requires_grad;
  return node;
}

template <typename T>
Var<T> make_op(Tensor<T> value, std::vector<Var<T>> parents,
               std::function<void(VarNode<T>&)> backward_fn) {
  auto node = std::make_shared<VarNode<T>>(std::move(value));
  for (const auto& p : parents) node->needs_grad = node->needs_grad || p->needs_grad;
  if (node->needs_grad) {
    node->parents = std::move(parents);
    node->backward_fn = std::move(backward_fn);
  }
  return node;
}

// Accumulates the seed gradient (ones unless supplied) through the graph.
template <typename T>
void backward(const Var<T>& root) {
  if (!root->needs_grad) return;

  // Post-order over parents, iteratively; reversed, children come first.
  std::vector<VarNode<T>*> topo;
  std::unordered_set<VarNode<T>*> visited;
  std::vector<std::pair<VarNode<T>*, size_t>> stack;
  stack.emplace_back(root.get(), 0);
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      VarNode<T>* parent = node->parents[next++].get();
      if (parent->needs_grad && visited.insert(parent).second)
        stack.emplace_back(parent, 0);
    } else {
      topo.push_back(node);
      stack.pop_back();
    }
  }

  auto& seed = root->ensure_grad();
  std::fill(seed.vec().begin(), seed.vec().end(), T(1));
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    VarNode<T>* node = *it;
    if (node->backward_fn && node->grad.numel() > 0) node->backward_fn(*node);
  }
}

}  // namespace pat::nn
