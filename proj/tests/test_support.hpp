// SPDX-License-Identifier: Apache-2.0
//
// Small deterministic corpora and helpers shared by the unit tests.

#pragma once

#include <random>
#include <vector>

#include "artrip/trajectory_data.hpp"

namespace artrip::testing {

inline Trajectory make_traj(std::vector<PoiIndex> pois, Timestamp t0 = 36000, Timestamp step = 1800) {
  Trajectory t;
  t.pois = std::move(pois);
  for (std::size_t i = 0; i < t.pois.size(); ++i) t.times.push_back(t0 + step * static_cast<Timestamp>(i));
  return t;
}

/// `count` trajectories over `num_pois` POIs with lengths in [3, max_len] and
/// no consecutive duplicates. Walks mostly follow p -> p+1 with occasional jumps.
inline std::vector<Trajectory> toy_corpus(int count, int num_pois, int max_len, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Trajectory> out;
  for (int c = 0; c < count; ++c) {
    const int len = 3 + static_cast<int>(rng() % static_cast<unsigned>(max_len - 2));
    std::vector<PoiIndex> pois{static_cast<PoiIndex>(rng() % static_cast<unsigned>(num_pois))};
    while (static_cast<int>(pois.size()) < len) {
      PoiIndex next = (pois.back() + 1) % num_pois;
      if (rng() % 4 == 0) next = static_cast<PoiIndex>(rng() % static_cast<unsigned>(num_pois));
      if (next == pois.back()) next = (next + 1) % num_pois;
      pois.push_back(next);
    }
    out.push_back(make_traj(pois, 32400 + 600 * c));
  }
  return out;
}

inline CorpusSplit train_only(std::vector<Trajectory> train) {
  CorpusSplit s;
  s.train = std::move(train);
  return s;
}

}  // namespace artrip::testing
