#pragma once

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "oceannet/tensor.hpp"

namespace oceannet::ad {

struct Node;

/// Reverse-mode rule for one recorded op. `grad` is dL/d(output). Every parent
/// is passed; those with requires_grad accumulate via Node::grad_buffer().
///
/// Complex gradients follow the convention g = dL/dRe + i dL/dIm.
using BackwardFn = std::function<void(const Tensor& grad, std::span<Node* const> parents)>;

struct Node {
  Tensor value;
  Tensor grad;
  std::vector<std::shared_ptr<Node>> parents;
  BackwardFn backward;
  std::string name;
  bool requires_grad = false;

  /// Lazily allocated zero accumulator matching `value`.
  Tensor& grad_buffer();
};

/// Handle to a value in the recorded computation. Copies share the node.
class Var {
 public:
  Var() = default;
  /// Constant (never differentiated).
  explicit Var(Tensor value);

  /// Named leaf whose gradient backward() reports.
  static Var parameter(std::string name, Tensor value);

  const Tensor& value() const { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  const std::string& name() const { return node_->name; }
  bool defined() const { return node_ != nullptr; }

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& shared() const { return node_; }

 private:
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  std::shared_ptr<Node> node_;

  friend Var make_result(Tensor value, std::vector<Var> parents, BackwardFn fn,
                         const char* op);
};

/// Gradient per parameter name.
using GradientMap = std::map<std::string, Tensor>;

/// Record an op result. Drops the backward rule when recording is disabled or
/// no parent requires a gradient. Throws NumericError on non-finite values.
Var make_result(Tensor value, std::vector<Var> parents, BackwardFn fn, const char* op);

/// Exact gradients of a real scalar `loss` w.r.t. `params`. Parameters not
/// reachable from the loss get zero gradients. Accumulated gradients on the
/// graph are released afterwards, so backward may be called again.
GradientMap backward(const Var& loss, std::span<const Var> params);

/// True when ops record backward rules on this thread.
bool grad_enabled();

/// Disables recording on the current thread for the guard's lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace oceannet::ad
