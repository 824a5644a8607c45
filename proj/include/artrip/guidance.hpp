// SPDX-License-Identifier: Apache-2.0
//
// Position-based guidance matrix and per-position confidence.

#pragma once

#include <vector>

#include "artrip/error.hpp"
#include "artrip/logits.hpp"
#include "artrip/trajectory_data.hpp"

namespace artrip {

/// |P| x m_max matrix whose entry (i, j) is the share of POI i's training
/// occurrences that fell on position j (0-based column j = position j + 1).
struct GuidanceMatrix {
  Matrix values;
  int m_max = 0;
  std::vector<double> poi_totals;  // f_i

  int num_pois() const { return static_cast<int>(values.rows()); }
};

/// C_j = (# POIs with a zero entry in column j) / |P|.
struct ConfidenceVector {
  std::vector<double> values;
};

GuidanceMatrix build_guidance_matrix(const std::vector<Trajectory>& train, int num_pois);

ConfidenceVector build_confidence(const GuidanceMatrix& pm, int num_pois);

/// H_hat[i][p] = H[i][p] * (1 + P_M[p][i]). Rows past m_max get identity
/// guidance and a warning.
LogitMatrix apply_guidance(const LogitMatrix& h, const GuidanceMatrix& pm, Warnings* warnings = nullptr);

/// The multiplicative factor (1 + P_M^T) for the first `rows` positions,
/// shaped like the logits. Rows past m_max are all ones.
Matrix guidance_factor(const GuidanceMatrix& pm, int rows, Warnings* warnings = nullptr);

/// Factor for a single position (0-based).
LogitRow guidance_factor_row(const GuidanceMatrix& pm, int position, Warnings* warnings = nullptr);

}  // namespace artrip
