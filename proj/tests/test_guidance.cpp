// SPDX-License-Identifier: Apache-2.0

#include "artrip/guidance.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace artrip;
using artrip::testing::make_traj;

namespace {

constexpr PoiIndex A = 0, B = 1, C = 2, D = 3;

// f_j^0 by direct count over the raw routes.
std::vector<int> absent_counts(const std::vector<Trajectory>& train, int k, int m_max) {
  std::vector<int> out;
  for (int j = 0; j < m_max; ++j) {
    std::vector<bool> seen(k, false);
    for (const auto& t : train) {
      if (j < t.length()) seen[t.pois[j]] = true;
    }
    int absent = 0;
    for (bool s : seen) absent += s ? 0 : 1;
    out.push_back(absent);
  }
  return out;
}

}  // namespace

TEST_CASE("guidance matrix on two routes") {
  std::vector<Trajectory> train{make_traj({A, B, C}), make_traj({A, C, B})};
  GuidanceMatrix pm = build_guidance_matrix(train, 3);
  CHECK(pm.m_max == 3);
  CHECK(pm.values.rows() == 3);
  CHECK(pm.values.cols() == 3);
  CHECK(pm.values.row(A) == (LogitRow(3) << 1, 0, 0).finished());
  CHECK(pm.values.row(B) == (LogitRow(3) << 0, 0.5, 0.5).finished());
  CHECK(pm.values.row(C) == (LogitRow(3) << 0, 0.5, 0.5).finished());
  CHECK(pm.poi_totals == std::vector<double>{2, 2, 2});

  ConfidenceVector c = build_confidence(pm, 3);
  REQUIRE(c.values.size() == 3);
  CHECK(c.values[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(c.values[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(c.values[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("unvisited POI row is zero") {
  GuidanceMatrix pm = build_guidance_matrix({make_traj({A, B, C})}, 4);
  CHECK(pm.values.row(D).isZero(0.0));
  CHECK(pm.poi_totals[D] == 0.0);
}

TEST_CASE("single route gives one-hot rows") {
  Trajectory t;
  t.pois = {A, B};
  t.times = {0, 1};
  GuidanceMatrix pm = build_guidance_matrix({t}, 2);
  CHECK(pm.m_max == 2);
  CHECK(pm.values == (Matrix(2, 2) << 1, 0, 0, 1).finished());
  ConfidenceVector c = build_confidence(pm, 2);
  CHECK(c.values == std::vector<double>{0.5, 0.5});
}

TEST_CASE("confidence edge cases") {
  // Distinct one-hot positions.
  GuidanceMatrix pm = build_guidance_matrix({make_traj({A, B, C, D})}, 4);
  for (double v : build_confidence(pm, 4).values) CHECK(v == doctest::Approx(0.75));
  // Every POI observed at position 1.
  GuidanceMatrix all = build_guidance_matrix({make_traj({A, B, C}), make_traj({B, C, A}), make_traj({C, A, B})}, 3);
  CHECK(build_confidence(all, 3).values[0] == 0.0);
}

TEST_CASE("guidance errors") {
  CHECK_THROWS_AS(build_guidance_matrix({}, 3), Error);
  CHECK_THROWS_AS(build_guidance_matrix({make_traj({A, B, D})}, 3), Error);
}

TEST_CASE("row sums and ranges on a random corpus") {
  auto train = testing::toy_corpus(300, 9, 8, 5);
  GuidanceMatrix pm = build_guidance_matrix(train, 12);
  for (int i = 0; i < 12; ++i) {
    if (pm.poi_totals[i] > 0) {
      CHECK(std::abs(pm.values.row(i).sum() - 1.0) <= 1e-9);
    } else {
      CHECK(pm.values.row(i).isZero(0.0));
    }
  }
  CHECK(pm.values.minCoeff() >= 0.0);
  CHECK(pm.values.maxCoeff() <= 1.0);
  for (double c : build_confidence(pm, 12).values) {
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
  }
}

TEST_CASE("absent counts never grow when routes are added") {
  auto corpus = testing::toy_corpus(60, 10, 7, 11);
  const int k = 10;
  std::vector<Trajectory> train{corpus[0]};
  for (std::size_t n = 1; n < corpus.size(); ++n) {
    GuidanceMatrix before = build_guidance_matrix(train, k);
    train.push_back(corpus[n]);
    GuidanceMatrix after = build_guidance_matrix(train, k);
    ConfidenceVector cb = build_confidence(before, k), ca = build_confidence(after, k);
    std::vector<int> oracle = absent_counts(train, k, after.m_max);
    for (int j = 0; j < after.m_max; ++j) {
      CHECK(ca.values[j] * k == doctest::Approx(oracle[j]));
      // Columns past the old m_max count as entirely absent before the addition.
      const double prev = j < before.m_max ? cb.values[j] : 1.0;
      CHECK(ca.values[j] <= prev);
    }
  }
}

TEST_CASE("apply_guidance") {
  GuidanceMatrix pm;
  pm.m_max = 1;
  pm.values = (Matrix(3, 1) << 0, 0.5, 0.5).finished();
  pm.poi_totals = {0, 1, 1};
  LogitMatrix h = (LogitMatrix(1, 3) << 1, 2, 3).finished();
  CHECK(apply_guidance(h, pm) == (LogitMatrix(1, 3) << 1, 3, 4.5).finished());

  LogitMatrix zero = LogitMatrix::Zero(1, 3);
  CHECK(apply_guidance(zero, pm).isZero(0.0));

  Warnings w;
  LogitMatrix two = (LogitMatrix(2, 3) << 1, 2, 3, 4, 5, 6).finished();
  LogitMatrix g = apply_guidance(two, pm, &w);
  CHECK(g.row(1) == two.row(1));
  CHECK(w.size() == 1);

  CHECK_THROWS_AS(apply_guidance(LogitMatrix::Zero(1, 4), pm), Error);
}

TEST_CASE("zero guidance is the identity") {
  GuidanceMatrix pm;
  pm.m_max = 6;
  pm.values = Matrix::Zero(7, 6);
  pm.poi_totals.assign(7, 0.0);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 3.0);
  LogitMatrix h(6, 7);
  for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = n(rng);
  LogitMatrix g = apply_guidance(h, pm);
  CHECK(g == h);
  for (int r = 0; r < 6; ++r) {
    Eigen::Index a, b;
    h.row(r).maxCoeff(&a);
    g.row(r).maxCoeff(&b);
    CHECK(a == b);
  }
}
