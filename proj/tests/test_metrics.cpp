// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "artrip/metrics.hpp"
#include "artrip/model.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace artrip;
using artrip::testing::make_traj;

TEST_CASE("worked example sequences") {
  const std::vector<PoiIndex> truth{4, 2, 8, 5};
  CHECK(std::abs(f1_score({4, 2, 2, 5}, truth) - 6.0 / 7.0) < 1e-12);
  CHECK(std::abs(pairs_f1({4, 2, 2, 5}, truth) - 2.0 / 3.0) < 1e-12);
  CHECK(std::abs(pairs_f1({4, 8, 2, 5}, truth) - 5.0 / 6.0) < 1e-12);
  CHECK(std::abs(rep_score({Trip{{4, 2, 2, 5}}}) - 0.25) < 1e-12);
  CHECK(f1_score({4, 8, 2, 5}, truth) == 1.0);
}

TEST_CASE("metric identities and edge cases") {
  CHECK(f1_score({1, 2, 3}, {1, 2, 3}) == 1.0);
  CHECK(f1_score({1, 2}, {3, 4}) == 0.0);
  CHECK(pairs_f1({1, 2, 3, 4}, {1, 2, 3, 4}) == 1.0);
  CHECK(pairs_f1({3, 3}, {3}) == 1.0);
  CHECK(pairs_f1({3}, {4}) == 0.0);
  CHECK(pairs_f1({3}, {3, 4}) == 0.0);
  CHECK(rep_score({Trip{{1, 2, 3}}}) == 0.0);
  CHECK(std::abs(rep_score({Trip{{1, 1, 1}}}) - 2.0 / 3.0) < 1e-15);
  CHECK_THROWS_AS(rep_score({}), Error);
  CHECK_THROWS_AS(rep_score({Trip{}}), Error);
  CHECK_THROWS_AS(f1_score({}, {1}), Error);
}

TEST_CASE("metrics agree with brute-force oracles") {
  for (const auto& c : oracle::random_cases(1000, 2024)) {
    CHECK(std::abs(f1_score(c.pred, c.truth) - oracle::f1(c.pred, c.truth)) <= 1e-12);
    CHECK(std::abs(pairs_f1(c.pred, c.truth) - oracle::pairs_f1(c.pred, c.truth)) <= 1e-12);
    CHECK(std::abs(trip_repetition(c.pred) - oracle::rep(c.pred)) <= 1e-12);
  }
}

TEST_CASE("symmetry and order invariance") {
  std::mt19937 rng(5);
  for (int t = 0; t < 300; ++t) {
    std::vector<PoiIndex> pool{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<PoiIndex> a(pool.begin(), pool.begin() + 1 + rng() % 6);
    std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<PoiIndex> b(pool.begin(), pool.begin() + 1 + rng() % 6);
    CHECK(std::abs(f1_score(a, b) - f1_score(b, a)) < 1e-15);
  }
  std::vector<Trip> trips{Trip{{1, 2, 1}}, Trip{{3, 4, 5, 6}}, Trip{{1, 1, 1, 1, 2}}};
  const double forward = rep_score(trips);
  std::reverse(trips.begin(), trips.end());
  CHECK(std::abs(rep_score(trips) - forward) < 1e-15);
  // Per-trip normalization: (1/3 + 0 + 3/5) / 3.
  CHECK(std::abs(forward - (1.0 / 3.0 + 0.6) / 3.0) < 1e-15);
}

namespace {

ModelParams tiny(Arch arch) {
  ModelConfig cfg;
  cfg.arch = arch;
  cfg.embed_dim = 8;
  cfg.num_layers = 1;
  cfg.hidden_dim = 12;
  return init_params(cfg, 6, 6);
}

}  // namespace

TEST_CASE("evaluate aggregates and serializes") {
  auto test = testing::toy_corpus(12, 6, 6, 3);
  ModelParams params = tiny(Arch::kOneShotEncoder);
  DecodeConfig greedy;
  MetricReport one = evaluate(params, nullptr, nullptr, test, greedy, 1);
  CHECK(one.rows.size() == 12);
  CHECK(one.f1.std == 0.0);
  CHECK(one.pairs_f1.std == 0.0);
  CHECK(one.rep.std == 0.0);

  MetricReport five = evaluate(params, nullptr, nullptr, test, greedy, 5);
  CHECK(five.rows.size() == 60);
  CHECK(five.f1.mean == doctest::Approx(one.f1.mean).epsilon(1e-12));
  CHECK(five.rep.std == doctest::Approx(0.0).epsilon(1e-15));

  DecodeConfig sampled;
  sampled.strategy = Strategy::kTopP;
  sampled.top_p = 1.0;
  MetricReport noisy = evaluate(params, nullptr, nullptr, test, sampled, 5);
  CHECK(noisy.f1.std > 0.0);
  for (const auto& r : noisy.rows) {
    CHECK((r.f1 >= 0.0 && r.f1 <= 1.0));
    CHECK((r.pairs_f1 >= 0.0 && r.pairs_f1 <= 1.0));
    CHECK((r.rep >= 0.0 && r.rep < 1.0));
  }
  // Mean of the per-repeat means, recomputed from the rows.
  double total = 0.0;
  for (const auto& r : noisy.rows) total += r.f1;
  CHECK(noisy.f1.mean == doctest::Approx(total / noisy.rows.size()).epsilon(1e-12));

  const std::string csv = to_csv(one);
  CHECK(csv.rfind("repeat,query_id,f1,pairs_f1,rep\n", 0) == 0);
  CHECK(csv.find("\nmean,all,") != std::string::npos);
  CHECK(csv.find("\nstd,all,0,0,0\n") != std::string::npos);

  CHECK_THROWS_WITH_AS(evaluate(params, nullptr, nullptr, {}, greedy, 1), doctest::Contains("empty test split"),
                       Error);
  CHECK_THROWS_AS(evaluate(params, nullptr, nullptr, test, greedy, 0), Error);
}

TEST_CASE("a memorizing model reproduces its single route") {
  const Trajectory route = make_traj({0, 3, 1, 3, 5});
  ModelConfig cfg;
  cfg.embed_dim = 16;
  cfg.num_layers = 1;
  cfg.hidden_dim = 32;
  cfg.alpha = 0.0;
  cfg.learning_rate = 1e-2;
  cfg.epochs = 200;
  TrainResult fit = train(testing::train_only({route}), 6, 5, cfg);
  MetricReport r = evaluate(fit.params, nullptr, nullptr, {route}, DecodeConfig{}, 1);
  CHECK(r.f1.mean == 1.0);
  CHECK(r.pairs_f1.mean == 1.0);
  CHECK(r.rep.mean == doctest::Approx(trip_repetition(route.pois)).epsilon(1e-15));
}

TEST_CASE("no-repeat mask gives zero REP") {
  auto test = testing::toy_corpus(30, 6, 6, 9);
  for (Arch arch : {Arch::kOneShotEncoder, Arch::kRecurrent}) {
    DecodeConfig cfg;
    cfg.no_repeat_mask = true;
    MetricReport r = evaluate(tiny(arch), nullptr, nullptr, test, cfg, 2);
    for (const auto& row : r.rows) {
      // Loop routes force p_s == p_e, which the mask cannot undo.
      if (test[row.query_id].pois.front() != test[row.query_id].pois.back()) CHECK(row.rep == 0.0);
    }
  }
}

TEST_CASE("generator-based evaluate uses the per-query stream") {
  auto test = testing::toy_corpus(5, 6, 5, 1);
  std::vector<std::uint64_t> first_draws;
  auto gen = [&](const Query& q, Rng& rng) {
    first_draws.push_back(rng());
    Trip t;
    t.pois.assign(q.length, q.start);
    t.pois.back() = q.end;
    return t;
  };
  evaluate(gen, test, 10, 2);
  REQUIRE(first_draws.size() == 10);
  for (std::uint64_t i = 0; i < 5; ++i) {
    CHECK(first_draws[i] == query_rng(10, i)());
    CHECK(first_draws[5 + i] == query_rng(11, i)());
  }
}
