#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "mcddpm/tensor.hpp"

namespace mcddpm::ad {

/// Handle to a node on a Tape.
struct Var {
  std::size_t id = 0;
};

/// Tensor-level reverse-mode tape. Nodes are appended in evaluation order, so a single
/// reverse sweep visits every node after all of its consumers.
class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  Var constant(Tensor value);
  Var variable(Tensor value);

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  /// Gradient of the last backward root with respect to v. Zero if v was unreachable.
  Tensor grad(Var v) const;

  /// Seeds d(root)/d(root) = 1 and propagates. `root` must hold a single element.
  void backward(Var root);

  // Op-author interface.
  Var record(Tensor value, bool requires_grad, Backward backward);
  Tensor& grad_ref(std::size_t id);  // allocated (zero) on first use
  const Tensor& grad_of(std::size_t id) const { return nodes_[id].grad; }
  const Tensor& value_of(std::size_t id) const { return nodes_[id].value; }
  bool needs(Var v) const { return nodes_[v.id].requires_grad; }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    Backward backward;
  };
  std::vector<Node> nodes_;
};

/// 'same' stride-1 convolution. x: [Ci,H,W], w: [Co,Ci,K,K], b: [Co].
Var conv2d(Tape& tape, Var x, Var w, Var b);
/// x: [C,H,W] plus v: [C] broadcast over each channel plane.
Var add_channel_bias(Tape& tape, Var x, Var v);
Var add(Tape& tape, Var a, Var b);
Var scale(Tape& tape, Var x, double s);
/// k: [1] times every element of x.
Var gain(Tape& tape, Var k, Var x);
/// x * sigmoid(x).
Var silu(Tape& tape, Var x);
/// W: [O,I], b: [O], v: [I].
Var linear(Tape& tape, Var w, Var b, Var v);
/// Unitary 2-D DFT of a [2,H,W] tensor read as (real, imag) planes. sign = -1 forward.
Var unitary_dft2(Tape& tape, Var x, int sign);
/// Zeroes columns whose `keep` flag is 0 in a [C,H,W] tensor (flags indexed by column).
Var column_mask(Tape& tape, Var x, std::vector<std::uint8_t> keep);
/// sum((x - target)^2) as a [1] tensor.
Var squared_error(Tape& tape, Var x, const Tensor& target);

}  // namespace mcddpm::ad
