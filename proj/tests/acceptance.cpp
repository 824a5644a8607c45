// SPDX-License-Identifier: Apache-2.0
//
// acceptance [--only 1,2,...] [--data-dir DIR] [--work-dir DIR]
//
// One PASS/FAIL line per criterion. Exit status is 0 only when every
// selected criterion passes. With --data-dir, criterion 3 reads the
// published poi-<code>.csv / userVisits-<code>.csv files from DIR;
// otherwise the synthetic stand-ins are generated.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "artrip/csv.hpp"
#include "artrip/experiment.hpp"
#include "artrip/guidance.hpp"
#include "artrip/metrics.hpp"
#include "artrip/model.hpp"
#include "artrip/repetition_analysis.hpp"
#include "artrip/synthetic.hpp"
#include "oracles.hpp"

using namespace artrip;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1 ---------------------------------------------------------------------------
Outcome metric_oracles() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (const auto& c : oracle::random_cases(1000, 2024)) {
    worst = std::max(worst, std::abs(f1_score(c.pred, c.truth) - oracle::f1(c.pred, c.truth)));
    worst = std::max(worst, std::abs(pairs_f1(c.pred, c.truth) - oracle::pairs_f1(c.pred, c.truth)));
    worst = std::max(worst, std::abs(trip_repetition(c.pred) - oracle::rep(c.pred)));
  }
  const std::vector<PoiIndex> truth{4, 2, 8, 5};
  double ex = 0.0;
  ex = std::max(ex, std::abs(f1_score({4, 2, 2, 5}, truth) - 6.0 / 7.0));
  ex = std::max(ex, std::abs(pairs_f1({4, 2, 2, 5}, truth) - 2.0 / 3.0));
  ex = std::max(ex, std::abs(pairs_f1({4, 8, 2, 5}, truth) - 5.0 / 6.0));
  ex = std::max(ex, std::abs(rep_score({Trip{{4, 2, 2, 5}}}) - 0.25));
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && ex <= 1e-12 && secs < 5.0,
          "max oracle diff " + fmt("%.3g", worst) + ", worked examples diff " + fmt("%.3g", ex) + ", " +
              fmt("%.2f", secs) + " s"};
}

// 2 ---------------------------------------------------------------------------
Outcome gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  ModelConfig cfg;
  cfg.embed_dim = 8;
  cfg.num_layers = 1;
  cfg.num_heads = 2;
  cfg.hidden_dim = 16;
  cfg.seed = 7;
  const int k = 6, n = 4;
  Trajectory target;
  target.pois = {1, 4, 2, 5};
  target.times = {36000, 37800, 39600, 41400};
  const GuidanceMatrix pm = build_guidance_matrix({target, Trajectory{{0, 3, 5, 1}, {36000, 37800, 39600, 41400}}}, k);
  const Query q = make_query(target);

  double worst = 0.0;
  bool ok = true;
  std::string archs;
  for (Arch arch : {Arch::kOneShotEncoder, Arch::kRecurrent}) {
    cfg.arch = arch;
    const ModelParams params = init_params(cfg, k, n);
    for (double alpha : {0.0, 1.0}) {
      const GradCheckReport r = grad_check(params, q, target, &pm, alpha);
      worst = std::max(worst, r.max_rel_error);
      ok = ok && r.pass && r.max_rel_error <= 1e-4;
    }
    GradCheckOptions bad;
    bad.corrupt = GradCheckOptions::Corruption{0, 3, 0.1};
    const bool caught = !grad_check(params, q, target, &pm, 1.0, bad).pass;
    ok = ok && caught;
    archs += std::string(archs.empty() ? "" : ", ") + std::string(to_string(arch)) +
             (caught ? " corruption caught" : " corruption MISSED");
  }
  const double secs = seconds_since(t0);
  return {ok && secs < 30.0, "max rel error " + fmt("%.3g", worst) + "; " + archs + ", " + fmt("%.2f", secs) + " s"};
}

// 3 ---------------------------------------------------------------------------
Outcome guidance_invariants(const fs::path& work, const std::string& data_dir) {
  double worst = 0.0;
  std::string cities;
  for (const auto& city : flickr_city_profiles()) {
    CityFiles files = data_dir.empty() ? write_synthetic_city(city, work / "cities")
                                       : synthetic_city_paths(city, data_dir);
    ExperimentConfig cfg;
    cfg.poi_file = files.poi_file;
    cfg.visits_file = files.visits_file;
    const Corpus c = load_corpus(cfg);
    const GuidanceMatrix pm = build_guidance_matrix(c.split.train, c.catalog.size());
    for (int i = 0; i < pm.num_pois(); ++i) {
      if (pm.poi_totals[i] > 0.0) worst = std::max(worst, std::abs(pm.values.row(i).sum() - 1.0));
    }
    cities += (cities.empty() ? "" : " ") + city.code;
  }

  GuidanceMatrix zero;
  zero.m_max = 5;
  zero.values = Matrix::Zero(7, 5);
  zero.poi_totals.assign(7, 0.0);
  std::mt19937_64 gen(9);
  std::normal_distribution<double> nd(0.0, 3.0);
  LogitMatrix h(5, 7);
  for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = nd(gen);
  const bool identity = apply_guidance(h, zero) == h;

  return {worst <= 1e-9 && identity, std::string(data_dir.empty() ? "synthetic " : "published ") + cities +
                                         ", max |row sum - 1| " + fmt("%.3g", worst) +
                                         (identity ? ", zero P_M is identity" : ", zero P_M NOT identity")};
}

// 4 ---------------------------------------------------------------------------
Outcome pmr_closed_form() {
  const auto t0 = std::chrono::steady_clock::now();
  auto chain = [](const Matrix& v) {
    TransitionMatrix m;
    m.values = v;
    m.normalized = true;
    m.row_observed.assign(v.rows(), true);
    return m;
  };
  const PmrResult u = pmr({chain(Matrix::Constant(2, 2, 0.5))}, 2, 1.0, 10);
  const TransitionMatrix ident = chain(Matrix::Identity(2, 2));
  const PmrResult id = pmr({ident}, 2, sparsity_xi(ident), 10);
  const double err = std::abs(u.value - 0.9990234375);
  const double secs = seconds_since(t0);
  return {err <= 1e-9 && u.convergent && !id.convergent && secs < 1.0,
          "uniform PMR " + fmt("%.12g", u.value) + " (err " + fmt("%.3g", err) + "), identity " +
              (id.convergent ? "convergent" : "non-convergent") + ", " + fmt("%.3f", secs) + " s"};
}

// 5, 6 ------------------------------------------------------------------------
struct Arm {
  double rep = 0.0;
  double f1 = 0.0;
};

struct TrendRuns {
  Arm oneshot_base, oneshot_agd, rnn_base, rnn_all;
  double seconds = 0.0;
  int seeds = 0;
};

/// Seed-averaged Glasgow runs for the base and all-mechanism configurations
/// of both architectures.
TrendRuns trend_runs(const fs::path& work, int seeds) {
  const auto t0 = std::chrono::steady_clock::now();
  const CityFiles files = write_synthetic_city(city_profile("Glasgow"), work / "cities");
  TrendRuns out;
  out.seeds = seeds;
  for (int s = 1; s <= seeds; ++s) {
    ExperimentConfig cfg;
    cfg.poi_file = files.poi_file;
    cfg.visits_file = files.visits_file;
    cfg.seed = static_cast<std::uint64_t>(s);
    const Corpus c = load_corpus(cfg);
    const int k = c.catalog.size();
    const GuidanceMatrix pm = build_guidance_matrix(c.split.train, k);
    const ConfidenceVector conf = build_confidence(pm, k);

    for (Arch arch : {Arch::kOneShotEncoder, Arch::kRecurrent}) {
      ModelConfig mc = cfg.model;
      mc.arch = arch;
      mc.seed = cfg.seed;

      mc.alpha = 0.0;
      const TrainResult base = train(c.split, k, c.m_max, mc);
      DecodeConfig greedy;
      greedy.seed = cfg.seed;
      const MetricReport rb = evaluate(base.params, nullptr, nullptr, c.split.test, greedy, 1);

      mc.alpha = 1.0;
      TrainOptions opt;
      opt.guidance = &pm;
      const TrainResult all = train(c.split, k, c.m_max, mc, opt);
      DecodeConfig adaptive = greedy;
      adaptive.strategy = Strategy::kAdaptive;
      const MetricReport ra = evaluate(all.params, &pm, &conf, c.split.test, adaptive, 1);

      Arm& b = arch == Arch::kOneShotEncoder ? out.oneshot_base : out.rnn_base;
      Arm& a = arch == Arch::kOneShotEncoder ? out.oneshot_agd : out.rnn_all;
      b.rep += rb.rep.mean / seeds;
      b.f1 += rb.f1.mean / seeds;
      a.rep += ra.rep.mean / seeds;
      a.f1 += ra.f1.mean / seeds;
    }
  }
  out.seconds = seconds_since(t0);
  return out;
}

std::string arm(const char* name, const Arm& a) {
  return std::string(name) + " REP " + fmt("%.4f", a.rep) + " F1 " + fmt("%.4f", a.f1);
}

Outcome table_trend(const TrendRuns& t) {
  const bool rep_ok = t.oneshot_agd.rep <= 0.5 * t.oneshot_base.rep;
  const bool f1_ok = t.oneshot_agd.f1 >= t.oneshot_base.f1 - 0.02;
  return {rep_ok && f1_ok && t.seconds < 900.0,
          arm("base", t.oneshot_base) + "; " + arm("+agd", t.oneshot_agd) + "; REP ratio " +
              fmt("%.3f", t.oneshot_agd.rep / t.oneshot_base.rep) + (rep_ok ? " ok" : " >0.5") + ", F1 delta " +
              fmt("%+.4f", t.oneshot_agd.f1 - t.oneshot_base.f1) + (f1_ok ? " ok" : " < -0.02") + "; " +
              std::to_string(t.seeds) + " seeds, " + fmt("%.0f", t.seconds) + " s"};
}

Outcome versatility_trend(const TrendRuns& t) {
  const bool arch_ok = t.rnn_base.rep > t.oneshot_base.rep;
  const bool mech_ok = t.rnn_all.rep < t.rnn_base.rep;
  return {arch_ok && mech_ok && t.seconds < 900.0,
          arm("rnn base", t.rnn_base) + " vs " + arm("one-shot base", t.oneshot_base) +
              (arch_ok ? " (rnn higher)" : " (rnn NOT higher)") + "; " + arm("rnn all", t.rnn_all) +
              (mech_ok ? " (lower)" : " (NOT lower)")};
}

// 7 ---------------------------------------------------------------------------
Outcome greedy_sparsity() {
  ModelConfig cfg;
  cfg.arch = Arch::kRecurrent;
  cfg.seed = 11;
  const int k = 6;
  const ModelParams params = init_params(cfg, k, 6);
  const Query q{0, 36000, 5, 50000, 6};
  bool one_per_row = true;
  double worst = 0.0;
  for (int position = 1; position <= 4; ++position) {
    const TransitionMatrix d = greedy_decision_matrix(params, q, position);
    for (int r = 0; r < k; ++r) one_per_row = one_per_row && (d.values.row(r).array() != 0.0).count() == 1;
    worst = std::max(worst, std::abs(sparsity_xi(d) - 1.0 / 6.0));
  }
  return {one_per_row && worst == 0.0,
          std::string(one_per_row ? "one nonzero per row" : "rows with != 1 nonzero") + ", |xi - 1/6| = " +
              fmt("%.3g", worst) + " over positions 1-4"};
}

// 8 ---------------------------------------------------------------------------
Outcome determinism(const fs::path& work) {
  const fs::path dir = work / "determinism";
  fs::remove_all(dir);
  const CityFiles files = write_synthetic_city(city_profile("Glasgow"), dir);
  auto run = [&](const std::string& out) {
    ExperimentConfig cfg;
    cfg.poi_file = files.poi_file;
    cfg.visits_file = files.visits_file;
    cfg.output_dir = dir / out;
    cfg.model.epochs = 3;
    cfg.repeats = 2;
    cmd_train(cfg);
    const std::string eval_out = cmd_evaluate(cfg).output;
    return csv::read_file(cfg.output_dir / "model.bundle") + csv::read_file(cfg.output_dir / "loss_trace.csv") +
           csv::read_file(cfg.output_dir / cfg.report) + eval_out;
  };
  const std::string a = run("run_a");
  const std::string b = run("run_b");
  const std::string c = run("run_a");
  return {a == b && a == c, a == b && a == c ? "bundle, loss trace and report identical across 3 runs"
                                             : "outputs differ between runs"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"artrip acceptance suite"};
  std::vector<int> only;
  std::string data_dir;
  std::string work = (fs::temp_directory_path() / "artrip_acceptance").string();
  int seeds = 5;
  app.add_option("--only", only, "Criteria to run (default: all)")->delimiter(',');
  app.add_option("--data-dir", data_dir, "Directory with the published city CSVs");
  app.add_option("--work-dir", work, "Scratch directory");
  app.add_option("--seeds", seeds, "Seeds for criteria 5 and 6")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  const std::set<int> selected = only.empty() ? std::set<int>{1, 2, 3, 4, 5, 6, 7, 8}
                                              : std::set<int>(only.begin(), only.end());
  fs::create_directories(work);

  std::optional<TrendRuns> trends;
  auto get_trends = [&]() -> const TrendRuns& {
    if (!trends) trends = trend_runs(work, seeds);
    return *trends;
  };

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"metric oracle equivalence", metric_oracles},
      {"gradient correctness", gradients},
      {"guidance invariants", [&] { return guidance_invariants(work, data_dir); }},
      {"PMR closed form", pmr_closed_form},
      {"ablation trend on Glasgow", [&] { return table_trend(get_trends()); }},
      {"versatility trend", [&] { return versatility_trend(get_trends()); }},
      {"greedy sparsity 1/k", greedy_sparsity},
      {"determinism", [&] { return determinism(work); }},
  };

  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (selected.count(id) == 0) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
