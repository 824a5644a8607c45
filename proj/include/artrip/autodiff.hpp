// SPDX-License-Identifier: Apache-2.0
//
// A small reverse-mode tape over dense matrices. Every op records its output
// value and a closure that pushes the output gradient back to its inputs.
// Only what the sequence models need is provided.

#pragma once

#include <functional>
#include <vector>

#include "artrip/logits.hpp"

namespace artrip::ad {

struct Var {
  int id = -1;
};

class Tape {
 public:
  /// A leaf that receives a gradient. The matrix must outlive the tape.
  Var parameter(const Matrix& value);
  /// A leaf that never receives a gradient. The matrix must outlive the tape.
  Var constant_ref(const Matrix& value);
  /// A leaf holding its own copy.
  Var constant(Matrix value);

  const Matrix& value(Var v) const;
  /// Gradient of the last backward() target with respect to v. Zero-sized if
  /// v did not influence the target.
  const Matrix& grad(Var v) const { return nodes_[v.id].grad; }
  bool needs_grad(Var v) const { return nodes_[v.id].needs_grad; }

  /// Seeds d(target)/d(target) = 1 for a 1x1 target and sweeps the tape.
  void backward(Var target);

  int size() const { return static_cast<int>(nodes_.size()); }

  // Used by op implementations.
  using Backward = std::function<void(Tape&, int self)>;
  Var record(Matrix value, std::vector<Var> inputs, Backward backward);
  /// Adds `g` into the gradient of v (no-op for nodes that need no gradient).
  void accumulate(Var v, const Matrix& g);
  const Matrix& grad_of(int id) const { return nodes_[id].grad; }

 private:
  struct Node {
    Matrix own;
    const Matrix* external = nullptr;
    Matrix grad;
    bool needs_grad = false;
    Backward backward;
  };
  std::vector<Node> nodes_;
};

Var add(Tape& t, Var a, Var b);
/// a (r x c) + row (1 x c) broadcast over rows.
Var add_row(Tape& t, Var a, Var row);
Var scale(Tape& t, Var a, double s);
/// Element-wise product with a constant matrix of the same shape.
Var mul_const(Tape& t, Var a, const Matrix& factor);
Var matmul(Tape& t, Var a, Var b);
/// a * b^T
Var matmul_nt(Tape& t, Var a, Var b);
/// Rows of `table` selected by `indices`; index -1 yields a zero row.
Var gather_rows(Tape& t, Var table, const std::vector<int>& indices);
Var tanh(Tape& t, Var a);
/// tanh approximation of GELU.
Var gelu(Tape& t, Var a);
/// Per-row layer normalization with learned gain and bias (1 x c each).
Var layer_norm(Tape& t, Var x, Var gain, Var bias, double eps = 1e-5);
Var softmax_rows(Tape& t, Var a);
Var col_block(Tape& t, Var a, int start, int width);
Var concat_cols(Tape& t, const std::vector<Var>& parts);
Var stack_rows(Tape& t, const std::vector<Var>& rows);

}  // namespace artrip::ad
