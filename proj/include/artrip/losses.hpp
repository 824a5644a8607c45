// SPDX-License-Identifier: Apache-2.0
//
// Recommendation (cross-entropy) and drift (pairwise cosine unlikelihood)
// losses over guided logits.

#pragma once

#include <vector>

#include "artrip/autodiff.hpp"
#include "artrip/error.hpp"
#include "artrip/logits.hpp"
#include "artrip/trajectory_data.hpp"

namespace artrip {

/// Pr(a, b) is clamped into [kDriftClamp, 1 - kDriftClamp].
inline constexpr double kDriftClamp = 1e-6;

/// Mean over rows of -log softmax(h_hat.row(i))[targets[i]].
double recommendation_loss(const LogitMatrix& h_hat, const std::vector<PoiIndex>& targets);
double recommendation_loss(const LogitMatrix& h_hat, const Trajectory& target);
/// d(recommendation_loss)/d(h_hat).
Matrix recommendation_loss_grad(const LogitMatrix& h_hat, const std::vector<PoiIndex>& targets);

/// Pr(a, b) = clamp((cos(a, b) + 1) / 2); a zero-norm row gives Pr = 0.5.
double drift_probability(const LogitRow& a, const LogitRow& b);

/// Sum over shifts w in [1, m-1] and positions i in [1, m-w] of
/// -log(1 - Pr(h_i, h_{i+w})). Unnormalized.
double drift_loss(const LogitMatrix& h_hat, Warnings* warnings = nullptr);
/// d(drift_loss)/d(h_hat). Clamped and zero-norm pairs contribute nothing.
Matrix drift_loss_grad(const LogitMatrix& h_hat);

/// recommendation_loss + alpha * drift_loss.
double total_loss(const LogitMatrix& h_hat, const Trajectory& target, double alpha);

namespace ad {
Var cross_entropy(Tape& t, Var logits, const std::vector<PoiIndex>& targets);
Var drift_penalty(Tape& t, Var logits);
}  // namespace ad

}  // namespace artrip
