// SPDX-License-Identifier: Apache-2.0

#include "artrip/decoding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_set>

namespace artrip {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kGreedy: return "greedy";
    case Strategy::kTopK: return "top_k";
    case Strategy::kTopP: return "top_p";
    case Strategy::kAdaptive: return "adaptive";
  }
  return "greedy";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "greedy") return Strategy::kGreedy;
  if (name == "top_k") return Strategy::kTopK;
  if (name == "top_p") return Strategy::kTopP;
  if (name == "adaptive") return Strategy::kAdaptive;
  throw Error("unknown strategy '" + std::string(name) + "' (expected greedy|top_k|top_p|adaptive)");
}

void DecodeConfig::validate() const {
  if (!(top_p > 0.0 && top_p <= 1.0)) throw Error("decode config: top_p must be in (0, 1]");
  if (strategy == Strategy::kTopK && top_k < 1) throw Error("decode config: top_k must be >= 1");
  if (lambda < 0.0) throw Error("decode config: lambda must be >= 0");
}

std::vector<double> softmax(const LogitRow& logits) {
  const double mx = logits.maxCoeff();
  if (!std::isfinite(mx)) throw Error("softmax: no finite logit");
  std::vector<double> probs(static_cast<std::size_t>(logits.size()));
  double sum = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits(i) - mx);
    sum += probs[i];
  }
  for (double& v : probs) v /= sum;
  return probs;
}

PoiIndex greedy_pick(const LogitRow& logits) {
  if (logits.size() == 0) throw Error("greedy_pick: empty row");
  PoiIndex best = 0;
  for (Eigen::Index i = 1; i < logits.size(); ++i) {
    if (logits(i) > logits(best)) best = static_cast<PoiIndex>(i);
  }
  return best;
}

namespace {

std::vector<PoiIndex> by_descending_prob(const std::vector<double>& probs) {
  std::vector<PoiIndex> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](PoiIndex a, PoiIndex b) { return probs[a] > probs[b]; });
  return order;
}

PoiIndex draw(const std::vector<double>& probs, const std::vector<PoiIndex>& candidates, Rng& rng,
              SampleTrace* trace) {
  double mass = 0.0;
  for (PoiIndex c : candidates) mass += probs[c];
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double target = uniform(rng) * mass;
  double cum = 0.0;
  PoiIndex chosen = candidates.back();
  for (PoiIndex c : candidates) {
    cum += probs[c];
    if (target < cum) {
      chosen = c;
      break;
    }
  }
  if (trace != nullptr) {
    trace->candidates = candidates;
    trace->chosen = chosen;
  }
  return chosen;
}

}  // namespace

std::vector<PoiIndex> nucleus(const std::vector<double>& probs, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw Error("nucleus: p must be in (0, 1]");
  // Mass within this tolerance of p counts as reaching it.
  constexpr double kSlack = 1e-12;
  std::vector<PoiIndex> out;
  double cum = 0.0;
  for (PoiIndex i : by_descending_prob(probs)) {
    if (probs[i] <= 0.0) break;
    out.push_back(i);
    cum += probs[i];
    if (cum >= p - kSlack) break;
  }
  return out;
}

PoiIndex top_p_sample(const LogitRow& logits, double p, Rng& rng, SampleTrace* trace) {
  const auto probs = softmax(logits);
  return draw(probs, nucleus(probs, p), rng, trace);
}

PoiIndex top_k_sample(const LogitRow& logits, int k, Rng& rng, SampleTrace* trace) {
  if (k < 1 || k > logits.size()) {
    throw Error("top_k_sample: k must be in [1, " + std::to_string(logits.size()) + "], got " + std::to_string(k));
  }
  const auto probs = softmax(logits);
  auto order = by_descending_prob(probs);
  order.resize(static_cast<std::size_t>(k));
  while (order.size() > 1 && probs[order.back()] <= 0.0) order.pop_back();
  return draw(probs, order, rng, trace);
}

PoiIndex adaptive_sample(const LogitRow& logits, double confidence, double p, double lambda, Rng& rng,
                         SampleTrace* trace, AdaptiveMode mode) {
  if (confidence < 0.0 || confidence > 1.0) throw Error("adaptive_sample: confidence must be in [0, 1]");
  if (mode == AdaptiveMode::kThreshold) {
    const double widened = std::min(1.0, p + lambda * (1.0 - confidence) * (1.0 - p));
    return top_p_sample(logits, widened, rng, trace);
  }
  const double temperature = 1.0 + lambda * (1.0 - confidence);
  if (temperature == 1.0) return top_p_sample(logits, p, rng, trace);
  return top_p_sample(logits / temperature, p, rng, trace);
}

PoiIndex select_poi(const LogitRow& logits, int position, const ConfidenceVector* confidence,
                    const DecodeConfig& cfg, Rng& rng, SampleTrace* trace) {
  switch (cfg.strategy) {
    case Strategy::kGreedy: {
      const PoiIndex best = greedy_pick(logits);
      if (trace != nullptr) *trace = SampleTrace{{best}, best};
      return best;
    }
    case Strategy::kTopK:
      return top_k_sample(logits, std::min<int>(cfg.top_k, static_cast<int>(logits.size())), rng, trace);
    case Strategy::kTopP:
      return top_p_sample(logits, cfg.top_p, rng, trace);
    case Strategy::kAdaptive: {
      if (confidence == nullptr) throw Error("adaptive decoding requires a confidence vector");
      // Past the longest training route no POI was observed: C = 1.
      const double c = position < static_cast<int>(confidence->values.size()) ? confidence->values[position] : 1.0;
      return adaptive_sample(logits, c, cfg.top_p, cfg.lambda, rng, trace, cfg.adaptive_mode);
    }
  }
  throw Error("select_poi: unknown strategy");
}

namespace {

class RepeatMask {
 public:
  RepeatMask(bool enabled, const Query& q) : enabled_(enabled) {
    if (enabled_) {
      used_.insert(q.start);
      used_.insert(q.end);
    }
  }

  LogitRow apply(const LogitRow& row, int position, Warnings* warnings) const {
    if (!enabled_) return row;
    LogitRow masked = row;
    for (PoiIndex p : used_) masked(p) = -std::numeric_limits<double>::infinity();
    if (!std::isfinite(masked.maxCoeff())) {
      warn(warnings, "no-repeat mask emptied position " + std::to_string(position + 1) + "; mask released");
      return row;
    }
    return masked;
  }

  void emit(PoiIndex p) {
    if (enabled_) used_.insert(p);
  }

 private:
  bool enabled_;
  std::unordered_set<PoiIndex> used_;
};

}  // namespace

Trip decode_trip(const Query& q, const ModelParams& params, const GuidanceMatrix* guidance,
                 const ConfidenceVector* confidence, const DecodeConfig& cfg, Rng& rng, Warnings* warnings) {
  cfg.validate();
  if (q.length < 3) throw Error("decode_trip: query length must be >= 3");
  if (q.start < 0 || q.start >= params.num_pois || q.end < 0 || q.end >= params.num_pois) {
    throw Error("decode_trip: query endpoint outside the vocabulary");
  }
  if (q.length > params.m_max) {
    warn(warnings, "decode_trip: query length " + std::to_string(q.length) + " exceeds m_max " +
                       std::to_string(params.m_max));
  }

  Trip trip;
  trip.pois.assign(static_cast<std::size_t>(q.length), q.start);
  trip.pois.back() = q.end;
  RepeatMask mask(cfg.no_repeat_mask, q);

  if (params.arch == Arch::kOneShotEncoder) {
    LogitMatrix h = forward_one_shot(q, params);
    if (guidance != nullptr) h = apply_guidance(h, *guidance, warnings);
    for (int r = 1; r < q.length - 1; ++r) {
      const PoiIndex p = select_poi(mask.apply(h.row(r), r, warnings), r, confidence, cfg, rng);
      trip.pois[r] = p;
      mask.emit(p);
    }
    return trip;
  }

  // Position 0 is forced; its step only advances the state.
  RecurrentState state = initial_state(q, params);
  state = forward_recurrent_step(state, q.start, q, params).second;
  for (int r = 1; r < q.length - 1; ++r) {
    auto [row, next] = forward_recurrent_step(state, trip.pois[r - 1], q, params);
    if (guidance != nullptr) row = row.cwiseProduct(guidance_factor_row(*guidance, r, warnings));
    const PoiIndex p = select_poi(mask.apply(row, r, warnings), r, confidence, cfg, rng);
    trip.pois[r] = p;
    mask.emit(p);
    state = next;
  }
  return trip;
}

}  // namespace artrip
