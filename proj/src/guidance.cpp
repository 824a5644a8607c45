// SPDX-License-Identifier: Apache-2.0

#include "artrip/guidance.hpp"

#include <algorithm>
#include <string>

namespace artrip {

GuidanceMatrix build_guidance_matrix(const std::vector<Trajectory>& train, int num_pois) {
  if (train.empty()) throw Error("build_guidance_matrix: empty training set");
  if (num_pois <= 0) throw Error("build_guidance_matrix: empty vocabulary");

  int m_max = 0;
  for (const auto& t : train) {
    m_max = std::max(m_max, t.length());
    for (PoiIndex p : t.pois) {
      if (p < 0 || p >= num_pois) {
        throw Error("build_guidance_matrix: POI count " + std::to_string(num_pois) +
                    " smaller than vocabulary index " + std::to_string(p));
      }
    }
  }

  GuidanceMatrix pm;
  pm.m_max = m_max;
  pm.values = Matrix::Zero(num_pois, m_max);
  for (const auto& t : train) {
    for (int j = 0; j < t.length(); ++j) pm.values(t.pois[j], j) += 1.0;
  }
  pm.poi_totals.assign(num_pois, 0.0);
  for (int i = 0; i < num_pois; ++i) {
    const double total = pm.values.row(i).sum();
    pm.poi_totals[i] = total;
    if (total > 0.0) pm.values.row(i) /= total;
  }
  return pm;
}

ConfidenceVector build_confidence(const GuidanceMatrix& pm, int num_pois) {
  if (num_pois <= 0) throw Error("build_confidence: empty vocabulary");
  ConfidenceVector c;
  c.values.resize(pm.m_max);
  for (int j = 0; j < pm.m_max; ++j) {
    int zeros = 0;
    for (int i = 0; i < pm.num_pois(); ++i) zeros += pm.values(i, j) == 0.0 ? 1 : 0;
    c.values[j] = static_cast<double>(zeros) / num_pois;
  }
  return c;
}

LogitRow guidance_factor_row(const GuidanceMatrix& pm, int position, Warnings* warnings) {
  LogitRow factor = LogitRow::Ones(pm.num_pois());
  if (position < pm.m_max) {
    factor += pm.values.col(position).transpose();
  } else {
    warn(warnings, "guidance: position " + std::to_string(position + 1) + " exceeds m_max " +
                       std::to_string(pm.m_max) + "; identity guidance used");
  }
  return factor;
}

Matrix guidance_factor(const GuidanceMatrix& pm, int rows, Warnings* warnings) {
  Matrix factor = Matrix::Ones(rows, pm.num_pois());
  const int guided = std::min(rows, pm.m_max);
  if (guided > 0) factor.topRows(guided) += pm.values.leftCols(guided).transpose();
  if (rows > pm.m_max) {
    warn(warnings, "guidance: " + std::to_string(rows) + " rows exceed m_max " +
                       std::to_string(pm.m_max) + "; identity guidance on trailing rows");
  }
  return factor;
}

LogitMatrix apply_guidance(const LogitMatrix& h, const GuidanceMatrix& pm, Warnings* warnings) {
  if (h.cols() != pm.num_pois()) {
    throw Error("apply_guidance: logits have " + std::to_string(h.cols()) + " columns, guidance has " +
                std::to_string(pm.num_pois()) + " POIs");
  }
  return h.cwiseProduct(guidance_factor(pm, static_cast<int>(h.rows()), warnings));
}

}  // namespace artrip
