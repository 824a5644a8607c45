// SPDX-License-Identifier: Apache-2.0

#include "artrip/repetition_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

#include "artrip/csv.hpp"

namespace artrip {

double sparsity_xi(const TransitionMatrix& m) {
  const auto k = m.values.rows();
  if (k < 1 || m.values.cols() != k) throw Error("sparsity_xi: matrix must be square and non-empty");
  const auto nonzero = (m.values.array() != 0.0).count();
  return static_cast<double>(nonzero) / static_cast<double>(k * k);
}

double mean_sparsity(const std::vector<TransitionMatrix>& ms) {
  if (ms.empty()) throw Error("mean_sparsity: no matrices");
  double sum = 0.0;
  for (const auto& m : ms) sum += sparsity_xi(m);
  return sum / static_cast<double>(ms.size());
}

TransitionMatrix perturb(const TransitionMatrix& m, double sigma, std::uint64_t seed, Warnings* warnings) {
  if (sigma < 0.0) throw Error("perturb: sigma must be >= 0");
  if (sigma == 0.0) return m;

  TransitionMatrix out = m;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (Eigen::Index i = 0; i < out.values.size(); ++i) {
    out.values.data()[i] = std::max(0.0, out.values.data()[i] + noise(rng));
  }
  for (Eigen::Index r = 0; r < out.values.rows(); ++r) {
    const double sum = out.values.row(r).sum();
    if (sum == 0.0) {
      warn(warnings, "perturb: row " + std::to_string(r) + " clipped to zero; uniform row substituted");
      out.values.row(r).setConstant(1.0 / static_cast<double>(out.values.cols()));
    } else {
      out.values.row(r) /= sum;
    }
  }
  out.normalized = true;
  return out;
}

PmrResult pmr(const std::vector<TransitionMatrix>& ms, int k, double xi, int j_max) {
  if (j_max < 0) throw Error("pmr: j_max must be >= 0");
  const double scale = static_cast<double>(k) * xi;
  if (!(scale > 0.0)) throw Error("degenerate sparsity");
  PmrResult result;
  if (j_max == 0) return result;
  if (ms.empty()) throw Error("pmr: no matrices");
  for (const auto& m : ms) {
    if (m.values.rows() != k || m.values.cols() != k) throw Error("pmr: matrix is not k x k");
  }

  Matrix product = Matrix::Identity(k, k);
  double norm = 1.0;
  for (int i = 1; i <= 2 * j_max; ++i) {
    product = product * ms[static_cast<std::size_t>(i - 1) % ms.size()].values;
    if (i % 2 == 0) {
      norm *= scale;
      const double term = product.trace() / norm;
      result.terms.push_back(term);
      result.value += term;
      result.cumulative.push_back(result.value);
    }
  }
  result.tail_term = result.terms.back();
  if (result.terms.size() >= 2) {
    result.convergent = result.terms.back() < result.terms[result.terms.size() - 2];
  }
  return result;
}

std::vector<TransitionMatrix> empirical_transitions(const std::vector<Trajectory>& train, int k) {
  if (train.empty()) throw Error("empirical_transitions: empty training set");
  if (k <= 0) throw Error("empirical_transitions: empty vocabulary");
  int m_max = 0;
  for (const auto& t : train) m_max = std::max(m_max, t.length());

  std::vector<TransitionMatrix> ms;
  for (int i = 0; i + 1 < m_max; ++i) {
    TransitionMatrix m;
    m.position = i;
    m.values = Matrix::Zero(k, k);
    for (const auto& t : train) {
      if (i + 1 < t.length()) {
        if (t.pois[i] >= k || t.pois[i + 1] >= k) throw Error("empirical_transitions: index >= k");
        m.values(t.pois[i], t.pois[i + 1]) += 1.0;
      }
    }
    m.row_observed.assign(k, false);
    for (int r = 0; r < k; ++r) {
      const double sum = m.values.row(r).sum();
      if (sum > 0.0) {
        m.values.row(r) /= sum;
        m.row_observed[r] = true;
      } else {
        m.values.row(r).setConstant(1.0 / k);
      }
    }
    m.normalized = true;
    ms.push_back(std::move(m));
  }
  return ms;
}

long RepetitionHistogram::total() const { return std::accumulate(by_position.begin(), by_position.end(), 0L); }

RepetitionHistogram repeat_histogram(const std::vector<Trip>& trips) {
  if (trips.empty()) throw Error("repeat_histogram: no trips");
  std::size_t longest = 0;
  for (const auto& t : trips) longest = std::max(longest, t.pois.size());
  RepetitionHistogram h;
  h.by_position.assign(longest + 1, 0);
  h.by_gap.assign(longest, 0);
  for (const auto& t : trips) {
    std::unordered_map<PoiIndex, std::size_t> first_seen;
    for (std::size_t j = 0; j < t.pois.size(); ++j) {
      auto [it, inserted] = first_seen.emplace(t.pois[j], j);
      if (!inserted) {
        ++h.by_position[j + 1];
        ++h.by_gap[j - it->second];
      }
    }
  }
  return h;
}

TransitionMatrix greedy_decision_matrix(const std::function<LogitRow(PoiIndex prev)>& scorer, int k) {
  TransitionMatrix d;
  d.values = Matrix::Zero(k, k);
  d.row_observed.assign(k, true);
  d.normalized = true;
  for (PoiIndex prev = 0; prev < k; ++prev) d.values(prev, greedy_pick(scorer(prev))) = 1.0;
  return d;
}

TransitionMatrix greedy_decision_matrix(const ModelParams& recurrent, const Query& q, int position,
                                        const GuidanceMatrix* guidance) {
  if (recurrent.arch != Arch::kRecurrent) throw Error("greedy_decision_matrix: needs a recurrent model");
  if (position < 1) throw Error("greedy_decision_matrix: position must be >= 1");
  RecurrentState state = initial_state(q, recurrent);
  state = forward_recurrent_step(state, q.start, q, recurrent).second;
  state.position = position;
  auto scorer = [&](PoiIndex prev) {
    LogitRow row = forward_recurrent_step(state, prev, q, recurrent).first;
    if (guidance != nullptr) row = row.cwiseProduct(guidance_factor_row(*guidance, position));
    return row;
  };
  TransitionMatrix d = greedy_decision_matrix(scorer, recurrent.num_pois);
  d.position = position;
  return d;
}

std::string histogram_position_csv(const RepetitionHistogram& h) {
  std::string out = "position,count\n";
  for (std::size_t j = 1; j < h.by_position.size(); ++j) {
    out += std::to_string(j) + "," + std::to_string(h.by_position[j]) + "\n";
  }
  return out;
}

std::string histogram_gap_csv(const RepetitionHistogram& h) {
  std::string out = "gap,count\n";
  for (std::size_t d = 1; d < h.by_gap.size(); ++d) out += std::to_string(d) + "," + std::to_string(h.by_gap[d]) + "\n";
  return out;
}

std::string pmr_csv(const PmrResult& r) {
  std::string out = "j,term,cumulative\n";
  for (std::size_t j = 0; j < r.terms.size(); ++j) {
    out += std::to_string(j + 1) + "," + csv::format_double(r.terms[j]) + "," + csv::format_double(r.cumulative[j]) +
           "\n";
  }
  return out;
}

std::string sparsity_csv(const std::vector<TransitionMatrix>& ms) {
  std::string out = "position,xi\n";
  for (const auto& m : ms) out += std::to_string(m.position + 1) + "," + csv::format_double(sparsity_xi(m)) + "\n";
  return out;
}

}  // namespace artrip
