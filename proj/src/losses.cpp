// SPDX-License-Identifier: Apache-2.0

#include "artrip/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace artrip {

namespace {

void check_targets(const LogitMatrix& h_hat, const std::vector<PoiIndex>& targets) {
  if (static_cast<Eigen::Index>(targets.size()) != h_hat.rows()) {
    throw Error("recommendation_loss: " + std::to_string(h_hat.rows()) + " logit rows for " +
                std::to_string(targets.size()) + " targets");
  }
  for (PoiIndex p : targets) {
    if (p < 0 || p >= h_hat.cols()) {
      throw Error("recommendation_loss: target index " + std::to_string(p) + " >= |P| = " +
                  std::to_string(h_hat.cols()));
    }
  }
}

double log_sum_exp(const LogitRow& row) {
  const double mx = row.maxCoeff();
  return mx + std::log((row.array() - mx).exp().sum());
}

}  // namespace

double recommendation_loss(const LogitMatrix& h_hat, const std::vector<PoiIndex>& targets) {
  check_targets(h_hat, targets);
  if (targets.empty()) return 0.0;
  double sum = 0.0;
  for (Eigen::Index r = 0; r < h_hat.rows(); ++r) {
    const LogitRow row = h_hat.row(r);
    sum += log_sum_exp(row) - row(targets[r]);
  }
  return sum / static_cast<double>(targets.size());
}

double recommendation_loss(const LogitMatrix& h_hat, const Trajectory& target) {
  return recommendation_loss(h_hat, target.pois);
}

Matrix recommendation_loss_grad(const LogitMatrix& h_hat, const std::vector<PoiIndex>& targets) {
  check_targets(h_hat, targets);
  Matrix g(h_hat.rows(), h_hat.cols());
  const double inv_m = 1.0 / static_cast<double>(h_hat.rows());
  for (Eigen::Index r = 0; r < h_hat.rows(); ++r) {
    const double mx = h_hat.row(r).maxCoeff();
    g.row(r) = (h_hat.row(r).array() - mx).exp().matrix();
    g.row(r) /= g.row(r).sum();
    g(r, targets[r]) -= 1.0;
    g.row(r) *= inv_m;
  }
  return g;
}

double drift_probability(const LogitRow& a, const LogitRow& b) {
  const double na = a.norm();
  const double nb = b.norm();
  const double cosine = (na == 0.0 || nb == 0.0) ? 0.0 : a.dot(b) / (na * nb);
  const double pr = (cosine + 1.0) / 2.0;
  return std::clamp(pr, kDriftClamp, 1.0 - kDriftClamp);
}

double drift_loss(const LogitMatrix& h_hat, Warnings* warnings) {
  const Eigen::Index m = h_hat.rows();
  if (m < 2) throw Error("drift_loss: need at least 2 rows");
  bool zero_row = false;
  for (Eigen::Index r = 0; r < m; ++r) zero_row = zero_row || h_hat.row(r).norm() == 0.0;
  if (zero_row) warn(warnings, "drift_loss: zero-norm logit row; its pairs use Pr = 0.5");

  double loss = 0.0;
  for (Eigen::Index shift = 1; shift < m; ++shift) {
    for (Eigen::Index i = 0; i + shift < m; ++i) {
      loss -= std::log(1.0 - drift_probability(h_hat.row(i), h_hat.row(i + shift)));
    }
  }
  return loss;
}

Matrix drift_loss_grad(const LogitMatrix& h_hat) {
  const Eigen::Index m = h_hat.rows();
  Matrix g = Matrix::Zero(m, h_hat.cols());
  Vector norms(m);
  for (Eigen::Index r = 0; r < m; ++r) norms(r) = h_hat.row(r).norm();
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      if (norms(i) == 0.0 || norms(j) == 0.0) continue;
      const double cosine = h_hat.row(i).dot(h_hat.row(j)) / (norms(i) * norms(j));
      const double pr = (cosine + 1.0) / 2.0;
      if (pr < kDriftClamp || pr > 1.0 - kDriftClamp) continue;
      // d/dcos of -log(1 - (cos + 1) / 2)
      const double coef = 0.5 / (1.0 - pr);
      const LogitRow a = h_hat.row(i);
      const LogitRow b = h_hat.row(j);
      g.row(i) += coef * (b / (norms(i) * norms(j)) - cosine * a / (norms(i) * norms(i)));
      g.row(j) += coef * (a / (norms(i) * norms(j)) - cosine * b / (norms(j) * norms(j)));
    }
  }
  return g;
}

double total_loss(const LogitMatrix& h_hat, const Trajectory& target, double alpha) {
  if (alpha < 0.0) throw Error("total_loss: alpha must be >= 0");
  const double rec = recommendation_loss(h_hat, target);
  if (alpha == 0.0) return rec;
  return rec + alpha * drift_loss(h_hat);
}

namespace ad {

Var cross_entropy(Tape& t, Var logits, const std::vector<PoiIndex>& targets) {
  Matrix v(1, 1);
  v(0, 0) = recommendation_loss(t.value(logits), targets);
  return t.record(std::move(v), {logits}, [logits, targets](Tape& tp, int self) {
    tp.accumulate(logits, tp.grad_of(self)(0, 0) * recommendation_loss_grad(tp.value(logits), targets));
  });
}

Var drift_penalty(Tape& t, Var logits) {
  Matrix v(1, 1);
  v(0, 0) = drift_loss(t.value(logits));
  return t.record(std::move(v), {logits}, [logits](Tape& tp, int self) {
    tp.accumulate(logits, tp.grad_of(self)(0, 0) * drift_loss_grad(tp.value(logits)));
  });
}

}  // namespace ad

}  // namespace artrip
