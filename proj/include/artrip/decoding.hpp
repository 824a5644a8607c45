// SPDX-License-Identifier: Apache-2.0
//
// Logits -> itineraries: greedy, top-k, top-p and confidence-adaptive
// sampling under the query's endpoint constraints.

#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "artrip/error.hpp"
#include "artrip/guidance.hpp"
#include "artrip/logits.hpp"
#include "artrip/model.hpp"
#include "artrip/trajectory_data.hpp"

namespace artrip {

enum class Strategy { kGreedy, kTopK, kTopP, kAdaptive };

std::string_view to_string(Strategy s);
/// greedy | top_k | top_p | adaptive
Strategy parse_strategy(std::string_view name);

/// How confidence enters adaptive sampling.
///  kTemperature: logits / (1 + lambda * (1 - c_j)), then top-p with p.
///  kThreshold:   top-p with p_j = min(1, p + lambda * (1 - c_j) * (1 - p)).
enum class AdaptiveMode { kTemperature, kThreshold };

struct DecodeConfig {
  Strategy strategy = Strategy::kGreedy;
  int top_k = 5;
  double top_p = 0.8;
  double lambda = 1.0;
  bool no_repeat_mask = false;
  std::uint64_t seed = 1;
  AdaptiveMode adaptive_mode = AdaptiveMode::kTemperature;

  void validate() const;
};

struct Trip {
  std::vector<PoiIndex> pois;
};

using Rng = std::mt19937_64;

/// Filled by the samplers when non-null: the candidate set the draw was
/// restricted to, and the draw itself.
struct SampleTrace {
  std::vector<PoiIndex> candidates;
  PoiIndex chosen = -1;
};

/// Softmax with -inf entries mapped to probability 0.
std::vector<double> softmax(const LogitRow& logits);

/// Argmax, ties to the lowest index.
PoiIndex greedy_pick(const LogitRow& logits);

PoiIndex top_p_sample(const LogitRow& logits, double p, Rng& rng, SampleTrace* trace = nullptr);

PoiIndex top_k_sample(const LogitRow& logits, int k, Rng& rng, SampleTrace* trace = nullptr);

PoiIndex adaptive_sample(const LogitRow& logits, double confidence, double p, double lambda, Rng& rng,
                         SampleTrace* trace = nullptr, AdaptiveMode mode = AdaptiveMode::kTemperature);

/// The nucleus for threshold p: indices in descending-probability order
/// (stable by index) whose cumulative mass first reaches p.
std::vector<PoiIndex> nucleus(const std::vector<double>& probs, double p);

/// Per-query generator seed; parallel decoding uses one stream per query.
inline Rng query_rng(std::uint64_t seed, std::uint64_t ordinal) { return Rng(seed ^ ordinal); }

/// Endpoints are forced to p_s / p_e. `guidance` == nullptr disables guiding;
/// `confidence` is required only by the adaptive strategy.
Trip decode_trip(const Query& q, const ModelParams& params, const GuidanceMatrix* guidance,
                 const ConfidenceVector* confidence, const DecodeConfig& cfg, Rng& rng,
                 Warnings* warnings = nullptr);

/// One selection step with the configured strategy; used by every decoder.
PoiIndex select_poi(const LogitRow& logits, int position, const ConfidenceVector* confidence,
                    const DecodeConfig& cfg, Rng& rng, SampleTrace* trace = nullptr);

}  // namespace artrip
