// SPDX-License-Identifier: Apache-2.0

#include "artrip/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

namespace artrip {

PopularityTable build_popularity(const std::vector<Trajectory>& train, int k) {
  if (k <= 0) throw Error("build_popularity: empty vocabulary");
  PopularityTable table;
  table.counts.assign(static_cast<std::size_t>(k), 0);
  for (const auto& t : train) {
    for (PoiIndex p : t.pois) {
      if (p < 0 || p >= k) throw Error("build_popularity: index outside vocabulary");
      ++table.counts[p];
    }
  }
  return table;
}

Trip popularity_decode(const Query& q, const PopularityTable& table) {
  if (q.length < 2) throw Error("popularity_decode: query length must be >= 2");
  const int k = static_cast<int>(table.counts.size());
  std::vector<PoiIndex> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](PoiIndex a, PoiIndex b) { return table.counts[a] > table.counts[b]; });

  Trip trip;
  trip.pois.push_back(q.start);
  for (PoiIndex p : order) {
    if (static_cast<int>(trip.pois.size()) == q.length - 1) break;
    if (p != q.start && p != q.end) trip.pois.push_back(p);
  }
  if (static_cast<int>(trip.pois.size()) != q.length - 1) {
    throw Error("popularity_decode: fewer than n-2 distinct non-endpoint POIs");
  }
  trip.pois.push_back(q.end);
  return trip;
}

Trip markov_decode(const Query& q, const std::vector<TransitionMatrix>& ms, const DecodeConfig& cfg, Rng& rng) {
  cfg.validate();
  if (ms.empty()) throw Error("markov_decode: no transition matrices");
  if (cfg.strategy == Strategy::kAdaptive) throw Error("markov_decode: adaptive strategy needs a model confidence");
  if (q.length < 2) throw Error("markov_decode: query length must be >= 2");
  const int k = ms.front().size();

  Trip trip;
  trip.pois.push_back(q.start);
  std::unordered_set<PoiIndex> used{q.start, q.end};
  for (int r = 1; r < q.length - 1; ++r) {
    const Matrix& m = ms[static_cast<std::size_t>(std::min<int>(r - 1, static_cast<int>(ms.size()) - 1))].values;
    LogitRow scores(k);
    for (int c = 0; c < k; ++c) {
      const double prob = m(trip.pois.back(), c);
      scores(c) = prob > 0.0 ? std::log(prob) : -std::numeric_limits<double>::infinity();
    }
    if (cfg.no_repeat_mask) {
      LogitRow masked = scores;
      for (PoiIndex u : used) masked(u) = -std::numeric_limits<double>::infinity();
      if (std::isfinite(masked.maxCoeff())) scores = masked;
    }
    if (!std::isfinite(scores.maxCoeff())) scores.setZero();
    const PoiIndex next = select_poi(scores, r, nullptr, cfg, rng);
    trip.pois.push_back(next);
    used.insert(next);
  }
  trip.pois.push_back(q.end);
  return trip;
}

}  // namespace artrip
