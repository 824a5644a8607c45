// SPDX-License-Identifier: Apache-2.0

#include "artrip/autodiff.hpp"

#include <cmath>

#include "artrip/error.hpp"

namespace artrip::ad {

Var Tape::parameter(const Matrix& value) {
  Node n;
  n.external = &value;
  n.needs_grad = true;
  nodes_.push_back(std::move(n));
  return Var{size() - 1};
}

Var Tape::constant_ref(const Matrix& value) {
  Node n;
  n.external = &value;
  nodes_.push_back(std::move(n));
  return Var{size() - 1};
}

Var Tape::constant(Matrix value) {
  Node n;
  n.own = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{size() - 1};
}

const Matrix& Tape::value(Var v) const {
  const Node& n = nodes_[v.id];
  return n.external != nullptr ? *n.external : n.own;
}

Var Tape::record(Matrix value, std::vector<Var> inputs, Backward backward) {
  Node n;
  n.own = std::move(value);
  for (Var in : inputs) n.needs_grad = n.needs_grad || nodes_[in.id].needs_grad;
  if (n.needs_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{size() - 1};
}

void Tape::accumulate(Var v, const Matrix& g) {
  Node& n = nodes_[v.id];
  if (!n.needs_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

void Tape::backward(Var target) {
  const Matrix& out = value(target);
  if (out.rows() != 1 || out.cols() != 1) throw Error("backward: target must be 1x1");
  for (auto& n : nodes_) n.grad.resize(0, 0);
  nodes_[target.id].grad = Matrix::Ones(1, 1);
  for (int id = target.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0 || !n.backward) continue;
    n.backward(*this, id);
  }
}

Var add(Tape& t, Var a, Var b) {
  Matrix v = t.value(a) + t.value(b);
  return t.record(std::move(v), {a, b}, [a, b](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    tp.accumulate(a, g);
    tp.accumulate(b, g);
  });
}

Var add_row(Tape& t, Var a, Var row) {
  Matrix v = t.value(a).rowwise() + t.value(row).row(0);
  return t.record(std::move(v), {a, row}, [a, row](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    tp.accumulate(a, g);
    tp.accumulate(row, g.colwise().sum());
  });
}

Var scale(Tape& t, Var a, double s) {
  Matrix v = t.value(a) * s;
  return t.record(std::move(v), {a}, [a, s](Tape& tp, int self) {
    tp.accumulate(a, tp.grad_of(self) * s);
  });
}

Var mul_const(Tape& t, Var a, const Matrix& factor) {
  Matrix v = t.value(a).cwiseProduct(factor);
  return t.record(std::move(v), {a}, [a, factor](Tape& tp, int self) {
    tp.accumulate(a, tp.grad_of(self).cwiseProduct(factor));
  });
}

Var matmul(Tape& t, Var a, Var b) {
  Matrix v = t.value(a) * t.value(b);
  return t.record(std::move(v), {a, b}, [a, b](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    if (tp.needs_grad(a)) tp.accumulate(a, g * tp.value(b).transpose());
    if (tp.needs_grad(b)) tp.accumulate(b, tp.value(a).transpose() * g);
  });
}

Var matmul_nt(Tape& t, Var a, Var b) {
  Matrix v = t.value(a) * t.value(b).transpose();
  return t.record(std::move(v), {a, b}, [a, b](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    if (tp.needs_grad(a)) tp.accumulate(a, g * tp.value(b));
    if (tp.needs_grad(b)) tp.accumulate(b, g.transpose() * tp.value(a));
  });
}

Var gather_rows(Tape& t, Var table, const std::vector<int>& indices) {
  const Matrix& tab = t.value(table);
  Matrix v = Matrix::Zero(static_cast<Eigen::Index>(indices.size()), tab.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] < 0) continue;
    if (indices[r] >= tab.rows()) throw Error("gather_rows: index out of range");
    v.row(static_cast<Eigen::Index>(r)) = tab.row(indices[r]);
  }
  return t.record(std::move(v), {table}, [table, indices](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    Matrix gt = Matrix::Zero(tp.value(table).rows(), tp.value(table).cols());
    for (std::size_t r = 0; r < indices.size(); ++r) {
      if (indices[r] >= 0) gt.row(indices[r]) += g.row(static_cast<Eigen::Index>(r));
    }
    tp.accumulate(table, gt);
  });
}

Var tanh(Tape& t, Var a) {
  Matrix v = t.value(a).array().tanh().matrix();
  return t.record(v, {a}, [a, v](Tape& tp, int self) {
    Matrix local = (1.0 - v.array().square()).matrix();
    tp.accumulate(a, tp.grad_of(self).cwiseProduct(local));
  });
}

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;
}  // namespace

Var gelu(Tape& t, Var a) {
  const Matrix& x = t.value(a);
  Matrix v = x.unaryExpr([](double z) {
    return 0.5 * z * (1.0 + std::tanh(kGeluC * (z + kGeluA * z * z * z)));
  });
  return t.record(std::move(v), {a}, [a](Tape& tp, int self) {
    Matrix local = tp.value(a).unaryExpr([](double z) {
      const double u = kGeluC * (z + kGeluA * z * z * z);
      const double th = std::tanh(u);
      const double du = kGeluC * (1.0 + 3.0 * kGeluA * z * z);
      return 0.5 * (1.0 + th) + 0.5 * z * (1.0 - th * th) * du;
    });
    tp.accumulate(a, tp.grad_of(self).cwiseProduct(local));
  });
}

Var layer_norm(Tape& t, Var x, Var gain, Var bias, double eps) {
  const Matrix& in = t.value(x);
  const auto cols = in.cols();
  Matrix xhat(in.rows(), cols);
  Vector inv_std(in.rows());
  for (Eigen::Index r = 0; r < in.rows(); ++r) {
    const double mean = in.row(r).mean();
    const double var = (in.row(r).array() - mean).square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (in.row(r).array() - mean) * inv_std(r);
  }
  Matrix v = (xhat.array().rowwise() * t.value(gain).row(0).array()).matrix();
  v.rowwise() += t.value(bias).row(0);
  return t.record(std::move(v), {x, gain, bias},
                  [x, gain, bias, xhat, inv_std](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    tp.accumulate(bias, g.colwise().sum());
    tp.accumulate(gain, g.cwiseProduct(xhat).colwise().sum());
    if (!tp.needs_grad(x)) return;
    const Matrix gx = (g.array().rowwise() * tp.value(gain).row(0).array()).matrix();
    const double n = static_cast<double>(gx.cols());
    Matrix dx(gx.rows(), gx.cols());
    for (Eigen::Index r = 0; r < gx.rows(); ++r) {
      const double mean_g = gx.row(r).mean();
      const double mean_gx = gx.row(r).cwiseProduct(xhat.row(r)).sum() / n;
      dx.row(r) = inv_std(r) * (gx.row(r).array() - mean_g - xhat.row(r).array() * mean_gx).matrix();
    }
    tp.accumulate(x, dx);
  });
}

Var softmax_rows(Tape& t, Var a) {
  const Matrix& in = t.value(a);
  Matrix v(in.rows(), in.cols());
  for (Eigen::Index r = 0; r < in.rows(); ++r) {
    const double mx = in.row(r).maxCoeff();
    v.row(r) = (in.row(r).array() - mx).exp().matrix();
    v.row(r) /= v.row(r).sum();
  }
  return t.record(v, {a}, [a, v](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    Matrix dx(v.rows(), v.cols());
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      const double dot = g.row(r).dot(v.row(r));
      dx.row(r) = v.row(r).cwiseProduct((g.row(r).array() - dot).matrix());
    }
    tp.accumulate(a, dx);
  });
}

Var col_block(Tape& t, Var a, int start, int width) {
  Matrix v = t.value(a).middleCols(start, width);
  return t.record(std::move(v), {a}, [a, start, width](Tape& tp, int self) {
    Matrix g = Matrix::Zero(tp.value(a).rows(), tp.value(a).cols());
    g.middleCols(start, width) = tp.grad_of(self);
    tp.accumulate(a, g);
  });
}

Var concat_cols(Tape& t, const std::vector<Var>& parts) {
  if (parts.empty()) throw Error("concat_cols: no inputs");
  Eigen::Index cols = 0;
  const Eigen::Index rows = t.value(parts[0]).rows();
  for (Var p : parts) cols += t.value(p).cols();
  Matrix v(rows, cols);
  Eigen::Index off = 0;
  for (Var p : parts) {
    v.middleCols(off, t.value(p).cols()) = t.value(p);
    off += t.value(p).cols();
  }
  return t.record(std::move(v), parts, [parts](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    Eigen::Index o = 0;
    for (Var p : parts) {
      const auto w = tp.value(p).cols();
      tp.accumulate(p, g.middleCols(o, w));
      o += w;
    }
  });
}

Var stack_rows(Tape& t, const std::vector<Var>& rows) {
  if (rows.empty()) throw Error("stack_rows: no inputs");
  const Eigen::Index cols = t.value(rows[0]).cols();
  Matrix v(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) v.row(static_cast<Eigen::Index>(r)) = t.value(rows[r]).row(0);
  return t.record(std::move(v), rows, [rows](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    for (std::size_t r = 0; r < rows.size(); ++r) tp.accumulate(rows[r], g.row(static_cast<Eigen::Index>(r)));
  });
}

}  // namespace artrip::ad
