// SPDX-License-Identifier: Apache-2.0
//
// Reference generators: global popularity and a position-indexed first-order
// Markov walk.

#pragma once

#include <vector>

#include "artrip/decoding.hpp"
#include "artrip/repetition_analysis.hpp"
#include "artrip/trajectory_data.hpp"

namespace artrip {

struct PopularityTable {
  std::vector<long> counts;  // visits per vocabulary index
};

PopularityTable build_popularity(const std::vector<Trajectory>& train, int k);

/// Interior positions take the most visited POIs other than the endpoints,
/// in descending count order (ties by index). Duplicate-free by construction.
Trip popularity_decode(const Query& q, const PopularityTable& table);

/// Walk from p_s choosing each interior POI from row `prev` of M_{r-1}
/// (the last matrix is reused past the end). Greedy takes the argmax; other
/// strategies sample from log-probabilities. The final position is p_e.
Trip markov_decode(const Query& q, const std::vector<TransitionMatrix>& ms, const DecodeConfig& cfg, Rng& rng);

}  // namespace artrip
