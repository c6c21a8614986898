#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mstd/tensor.hpp"

namespace mstd {

/// Tape-based reverse-mode differentiation over Tensor values.
///
/// Every primitive records its output value and a pull function that, given
/// the adjoint of the output, accumulates adjoints into the node's parents.
/// backward() replays pull functions in exact reverse application order, so
/// gradients are deterministic for a fixed tape. A tape is confined to one
/// logical thread; independent tapes share no state.
class Tape {
 public:
  using NodeId = std::int32_t;

  /// Registers an input or parameter value with no backward rule.
  NodeId leaf(Tensor value);

  const Tensor& value(NodeId id) const { return nodes_[check(id)].value; }
  /// Adjoint of a node, valid after backward(). Unused nodes hold zeros.
  const Tensor& grad(NodeId id) const { return nodes_[check(id)].grad; }
  std::size_t size() const { return nodes_.size(); }

  // Elementwise primitives. add/mul broadcast a {1,1} scalar against any
  // shape; otherwise shapes must match exactly.
  NodeId add(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId sigmoid(NodeId a);
  NodeId tanh(NodeId a);
  NodeId relu(NodeId a);
  NodeId scale(NodeId a, double c);      // c * a
  NodeId add_const(NodeId a, double c);  // a + c

  NodeId matmul(NodeId a, NodeId b);

  // Structural primitives.
  NodeId row(NodeId a, std::size_t i);       // {r,c} -> {1,c}
  NodeId column(NodeId a, std::size_t j);    // {r,c} -> {r,1}
  NodeId element(NodeId a, std::size_t i);   // flat index -> {1,1}
  NodeId pad_cols_left(NodeId a, std::size_t n);  // {r,c} -> {r,n+c}
  NodeId vstack(const std::vector<NodeId>& rows);  // k x {1,c} -> {k,c}

  // Reductions and the classification head.
  NodeId sum(NodeId a);                      // -> {1,1}
  NodeId softmax(NodeId a);                  // {c,1} -> {c,1}
  NodeId nll(NodeId probs, std::size_t label);        // -log(clamp(p_y))
  NodeId average(const std::vector<NodeId>& scalars);  // mean of {1,1} nodes

  /// Seeds the scalar loss with adjoint 1 and pulls gradients back through
  /// every recorded primitive. Adjoints are zeroed first, so repeated calls
  /// do not accumulate across passes.
  void backward(NodeId loss);

  static constexpr double kLogClamp = 1e-12;

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::function<void(Tape&, const Tensor&)> pull;  // null for leaves
  };

  NodeId push(Tensor value, std::function<void(Tape&, const Tensor&)> pull);
  NodeId check(NodeId id) const;
  Tensor& grad_ref(NodeId id) { return nodes_[check(id)].grad; }

  std::vector<Node> nodes_;
};

}  // namespace mstd
