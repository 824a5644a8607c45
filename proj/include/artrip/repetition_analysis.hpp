// SPDX-License-Identifier: Apache-2.0
//
// Diagnostics for repetition: transition-matrix sparsity, noise perturbation,
// the truncated probability-matrix-of-repetition (PMR) series and
// repeat-position histograms.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "artrip/decoding.hpp"
#include "artrip/error.hpp"
#include "artrip/guidance.hpp"
#include "artrip/logits.hpp"
#include "artrip/model.hpp"
#include "artrip/trajectory_data.hpp"

namespace artrip {

/// k x k transition probabilities from position `position` (0-based) to the next.
struct TransitionMatrix {
  Matrix values;
  int position = 0;
  bool normalized = false;
  /// Rows backed by data; unobserved rows are uniform when normalized.
  std::vector<bool> row_observed;

  int size() const { return static_cast<int>(values.rows()); }
};

/// Fraction of strictly nonzero entries.
double sparsity_xi(const TransitionMatrix& m);

/// Mean of sparsity_xi over the list.
double mean_sparsity(const std::vector<TransitionMatrix>& ms);

/// M' = M + N with N ~ iid Normal(0, sigma), negatives clipped to 0, rows
/// renormalized. A row that clips to all zeros becomes uniform (warning).
/// sigma == 0 returns the input unchanged.
TransitionMatrix perturb(const TransitionMatrix& m, double sigma, std::uint64_t seed, Warnings* warnings = nullptr);

struct PmrResult {
  double value = 0.0;
  std::vector<double> terms;       // term_j for j = 1..j_max
  std::vector<double> cumulative;  // partial sums
  double tail_term = 0.0;          // last term
  bool convergent = true;          // false when the last term did not decrease
};

/// sum_{j=1}^{j_max} tr(prod_{i=1}^{2j} M'_i) / (k xi)^j. Matrices are reused
/// cyclically when fewer than 2 j_max are supplied.
PmrResult pmr(const std::vector<TransitionMatrix>& ms, int k, double xi, int j_max);

/// One row-normalized matrix per adjacent position pair (i, i+1) observed in
/// the training routes. Rows without data are uniform and flagged.
std::vector<TransitionMatrix> empirical_transitions(const std::vector<Trajectory>& train, int k);

struct RepetitionHistogram {
  std::vector<long> by_position;  // index = 1-based position of the repeat
  std::vector<long> by_gap;       // index = distance to the first prior visit

  long total() const;
};

RepetitionHistogram repeat_histogram(const std::vector<Trip>& trips);

/// 0/1 matrix whose row `prev` marks the greedy choice of `scorer(prev)`.
TransitionMatrix greedy_decision_matrix(const std::function<LogitRow(PoiIndex prev)>& scorer, int k);

/// Greedy decisions of a recurrent model at `position` (>= 1) for every
/// previous POI, holding the state reached after the forced first step of q.
TransitionMatrix greedy_decision_matrix(const ModelParams& recurrent, const Query& q, int position,
                                        const GuidanceMatrix* guidance = nullptr);

std::string histogram_position_csv(const RepetitionHistogram& h);
std::string histogram_gap_csv(const RepetitionHistogram& h);
std::string pmr_csv(const PmrResult& r);
/// `position,xi` with 1-based positions.
std::string sparsity_csv(const std::vector<TransitionMatrix>& ms);

}  // namespace artrip
