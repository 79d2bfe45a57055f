#include "oceannet/autodiff.hpp"

#include <unordered_set>

#include "oceannet/errors.hpp"

namespace oceannet::ad {

namespace {
thread_local bool g_recording = true;
}  // namespace

Tensor& Node::grad_buffer() {
  if (grad.empty() && !value.empty()) grad = Tensor::zeros(value.shape(), value.dtype());
  return grad;
}

Var::Var(Tensor value) : node_(std::make_shared<Node>()) { node_->value = std::move(value); }

Var Var::parameter(std::string name, Tensor value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->name = std::move(name);
  node->requires_grad = true;
  return Var(std::move(node));
}

Var make_result(Tensor value, std::vector<Var> parents, BackwardFn fn, const char* op) {
  if (!value.all_finite()) {
    throw NumericError(std::string("non-finite value produced by ") + op);
  }
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  if (g_recording) {
    bool any = false;
    for (const auto& p : parents) any = any || p.requires_grad();
    if (any) {
      node->requires_grad = true;
      node->backward = std::move(fn);
      node->parents.reserve(parents.size());
      for (auto& p : parents) node->parents.push_back(p.shared());
    }
  }
  return Var(std::move(node));
}

GradientMap backward(const Var& loss, std::span<const Var> params) {
  if (!loss.defined() || loss.value().numel() != 1 || loss.value().is_complex()) {
    throw UsageError("backward: loss must be a real scalar, got shape " +
                     (loss.defined() ? shape_str(loss.shape()) : std::string("<undefined>")));
  }

  // Iterative post-order DFS over nodes that carry gradients.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  if (loss.requires_grad()) {
    std::vector<std::pair<Node*, std::size_t>> stack{{loss.node(), 0}};
    visited.insert(loss.node());
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < node->parents.size()) {
        Node* p = node->parents[next++].get();
        if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
      } else {
        order.push_back(node);
        stack.pop_back();
      }
    }
  }

  if (!order.empty()) {
    loss.node()->grad_buffer().raw()[0] = 1.0;
    std::vector<Node*> parent_ptrs;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      Node* node = *it;
      if (!node->backward || node->grad.empty()) continue;
      parent_ptrs.clear();
      for (auto& p : node->parents) parent_ptrs.push_back(p.get());
      node->backward(node->grad, parent_ptrs);
      if (!node->parents.empty()) node->grad = Tensor();
    }
  }

  GradientMap grads;
  for (const auto& p : params) {
    if (!p.defined()) throw UsageError("backward: undefined parameter");
    Node* n = p.node();
    Tensor g = n->grad.empty() ? Tensor::zeros(n->value.shape(), n->value.dtype())
                               : std::move(n->grad);
    n->grad = Tensor();
    auto [it, inserted] = grads.emplace(n->name, std::move(g));
    if (!inserted) throw UsageError("backward: duplicate parameter name " + n->name);
  }
  for (Node* n : order) n->grad = Tensor();
  return grads;
}

bool grad_enabled() { return g_recording; }

NoGradGuard::NoGradGuard() : previous_(g_recording) { g_recording = false; }
NoGradGuard::~NoGradGuard() { g_recording = previous_; }

}  // namespace oceannet::ad
