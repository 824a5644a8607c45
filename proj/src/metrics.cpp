// SPDX-License-Identifier: Apache-2.0

#include "artrip/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>
#include <utility>

#include "artrip/csv.hpp"

namespace artrip {

namespace {

double harmonic(double precision, double recall) {
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

std::vector<PoiIndex> first_occurrences(const std::vector<PoiIndex>& seq) {
  std::vector<PoiIndex> out;
  std::unordered_set<PoiIndex> seen;
  for (PoiIndex p : seq) {
    if (seen.insert(p).second) out.push_back(p);
  }
  return out;
}

std::set<std::pair<PoiIndex, PoiIndex>> ordered_pairs(const std::vector<PoiIndex>& dedup) {
  std::set<std::pair<PoiIndex, PoiIndex>> pairs;
  for (std::size_t i = 0; i < dedup.size(); ++i) {
    for (std::size_t j = i + 1; j < dedup.size(); ++j) pairs.emplace(dedup[i], dedup[j]);
  }
  return pairs;
}

}  // namespace

double f1_score(const std::vector<PoiIndex>& pred, const std::vector<PoiIndex>& truth) {
  if (pred.empty() || truth.empty()) throw Error("f1_score: empty sequence");
  const std::set<PoiIndex> p(pred.begin(), pred.end());
  const std::set<PoiIndex> t(truth.begin(), truth.end());
  std::size_t common = 0;
  for (PoiIndex x : p) common += t.count(x);
  return harmonic(static_cast<double>(common) / p.size(), static_cast<double>(common) / t.size());
}

double f1_score(const Trip& pred, const Trajectory& truth) { return f1_score(pred.pois, truth.pois); }

double pairs_f1(const std::vector<PoiIndex>& pred, const std::vector<PoiIndex>& truth) {
  if (pred.empty() || truth.empty()) throw Error("pairs_f1: empty sequence");
  const auto pred_dedup = first_occurrences(pred);
  const auto truth_dedup = first_occurrences(truth);
  const auto pp = ordered_pairs(pred_dedup);
  const auto tp = ordered_pairs(truth_dedup);
  if (pp.empty() && tp.empty()) return pred_dedup == truth_dedup ? 1.0 : 0.0;
  if (pp.empty() || tp.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto& pair : pp) common += tp.count(pair);
  return harmonic(static_cast<double>(common) / pp.size(), static_cast<double>(common) / tp.size());
}

double pairs_f1(const Trip& pred, const Trajectory& truth) { return pairs_f1(pred.pois, truth.pois); }

double trip_repetition(const std::vector<PoiIndex>& trip) {
  if (trip.empty()) throw Error("rep_score: empty trip");
  const std::unordered_set<PoiIndex> unique(trip.begin(), trip.end());
  const double n = static_cast<double>(trip.size());
  return (n - static_cast<double>(unique.size())) / n;
}

double rep_score(const std::vector<Trip>& trips) {
  if (trips.empty()) throw Error("rep_score: no trips");
  double sum = 0.0;
  for (const auto& t : trips) sum += trip_repetition(t.pois);
  return sum / static_cast<double>(trips.size());
}

namespace {

MeanStd summarize(const std::vector<double>& per_repeat) {
  MeanStd s;
  for (double v : per_repeat) s.mean += v;
  s.mean /= static_cast<double>(per_repeat.size());
  double var = 0.0;
  for (double v : per_repeat) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / static_cast<double>(per_repeat.size()));
  return s;
}

}  // namespace

MetricReport evaluate(const TripGenerator& generate, const std::vector<Trajectory>& test, std::uint64_t seed,
                      int repeats) {
  if (test.empty()) throw Error("evaluate: empty test split");
  if (repeats < 1) throw Error("evaluate: repeats must be >= 1");

  MetricReport report;
  std::vector<double> f1s, pf1s, reps;
  for (int r = 0; r < repeats; ++r) {
    const std::uint64_t repeat_seed = seed + static_cast<std::uint64_t>(r);
    double f1_sum = 0.0, pf1_sum = 0.0, rep_sum = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) {
      const Query q = make_query(test[i]);
      Rng rng = query_rng(repeat_seed, i);
      const Trip trip = generate(q, rng);
      TripMetrics row{r, static_cast<int>(i), f1_score(trip, test[i]), pairs_f1(trip, test[i]),
                      trip_repetition(trip.pois)};
      f1_sum += row.f1;
      pf1_sum += row.pairs_f1;
      rep_sum += row.rep;
      report.rows.push_back(row);
    }
    const double n = static_cast<double>(test.size());
    f1s.push_back(f1_sum / n);
    pf1s.push_back(pf1_sum / n);
    reps.push_back(rep_sum / n);
  }
  report.f1 = summarize(f1s);
  report.pairs_f1 = summarize(pf1s);
  report.rep = summarize(reps);
  return report;
}

MetricReport evaluate(const ModelParams& params, const GuidanceMatrix* guidance, const ConfidenceVector* confidence,
                      const std::vector<Trajectory>& test, const DecodeConfig& cfg, int repeats) {
  cfg.validate();
  auto generate = [&](const Query& q, Rng& rng) { return decode_trip(q, params, guidance, confidence, cfg, rng); };
  return evaluate(generate, test, cfg.seed, repeats);
}

std::string to_csv(const MetricReport& report) {
  std::string out = "repeat,query_id,f1,pairs_f1,rep\n";
  for (const auto& r : report.rows) {
    out += std::to_string(r.repeat) + "," + std::to_string(r.query_id) + "," + csv::format_double(r.f1) + "," +
           csv::format_double(r.pairs_f1) + "," + csv::format_double(r.rep) + "\n";
  }
  out += "mean,all," + csv::format_double(report.f1.mean) + "," + csv::format_double(report.pairs_f1.mean) + "," +
         csv::format_double(report.rep.mean) + "\n";
  out += "std,all," + csv::format_double(report.f1.std) + "," + csv::format_double(report.pairs_f1.std) + "," +
         csv::format_double(report.rep.std) + "\n";
  return out;
}

}  // namespace artrip
