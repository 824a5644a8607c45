// SPDX-License-Identifier: Apache-2.0
//
// Trip quality (F1, PairsF1) and repetition (REP) metrics.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "artrip/decoding.hpp"
#include "artrip/guidance.hpp"
#include "artrip/model.hpp"
#include "artrip/trajectory_data.hpp"

namespace artrip {

/// Set-level F1 over the unique POIs of both sequences.
double f1_score(const std::vector<PoiIndex>& pred, const std::vector<PoiIndex>& truth);
double f1_score(const Trip& pred, const Trajectory& truth);

/// F1 over ordered pairs (a, b), a before b, in the first-occurrence
/// deduplicated sequences.
double pairs_f1(const std::vector<PoiIndex>& pred, const std::vector<PoiIndex>& truth);
double pairs_f1(const Trip& pred, const Trajectory& truth);

/// (n - |U(trip)|) / n for a single trip.
double trip_repetition(const std::vector<PoiIndex>& trip);

/// Mean of trip_repetition over trips. Throws on an empty list or an empty trip.
double rep_score(const std::vector<Trip>& trips);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

struct TripMetrics {
  int repeat = 0;
  int query_id = 0;
  double f1 = 0.0;
  double pairs_f1 = 0.0;
  double rep = 0.0;
};

/// Summary statistics are taken over per-repeat means (population std).
struct MetricReport {
  MeanStd f1;
  MeanStd pairs_f1;
  MeanStd rep;
  std::vector<TripMetrics> rows;
};

/// Produces a trip for a query; `rng` is the per-query stream.
using TripGenerator = std::function<Trip(const Query&, Rng&)>;

/// For each repeat r (seed + r) and test trajectory i: make_query, generate
/// with query_rng(seed + r, i), score.
MetricReport evaluate(const TripGenerator& generate, const std::vector<Trajectory>& test, std::uint64_t seed,
                      int repeats);

MetricReport evaluate(const ModelParams& params, const GuidanceMatrix* guidance, const ConfidenceVector* confidence,
                      const std::vector<Trajectory>& test, const DecodeConfig& cfg, int repeats);

/// `repeat,query_id,f1,pairs_f1,rep` rows, then `mean,all,...` and `std,all,...`.
std::string to_csv(const MetricReport& report);

}  // namespace artrip
