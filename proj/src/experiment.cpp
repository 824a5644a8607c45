// SPDX-License-Identifier: Apache-2.0

#include "artrip/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>

#include "artrip/baselines.hpp"
#include "artrip/bundle.hpp"
#include "artrip/csv.hpp"
#include "artrip/guidance.hpp"
#include "artrip/metrics.hpp"
#include "artrip/repetition_analysis.hpp"

namespace artrip {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected) {
  throw Error("config: invalid value '" + value + "' for " + key + " (expected " + expected + ")");
}

int to_int(const std::string& key, const std::string& v) {
  auto x = csv::parse_int(v);
  if (!x || *x < std::numeric_limits<int>::min() || *x > std::numeric_limits<int>::max()) bad_value(key, v, "integer");
  return static_cast<int>(*x);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  auto x = csv::parse_int(v);
  if (!x || *x < 0) bad_value(key, v, "non-negative integer");
  return static_cast<std::uint64_t>(*x);
}

double to_double(const std::string& key, const std::string& v) {
  auto x = csv::parse_double(v);
  if (!x || !std::isfinite(*x)) bad_value(key, v, "number");
  return *x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  bad_value(key, v, "boolean");
}

fs::path to_path(const std::string& v, const fs::path& base) {
  fs::path p(v);
  if (p.is_relative() && !base.empty()) p = base / p;
  return p.lexically_normal();
}

GeneratorKind parse_generator(const std::string& key, const std::string& v) {
  if (v == "artrip") return GeneratorKind::kArtrip;
  if (v == "popularity") return GeneratorKind::kPopularity;
  if (v == "markov") return GeneratorKind::kMarkov;
  bad_value(key, v, "artrip|popularity|markov");
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&, const fs::path&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"poi_file", [](auto& c, auto&, auto& v, auto& b) { c.poi_file = to_path(v, b); }},
      {"visits_file", [](auto& c, auto&, auto& v, auto& b) { c.visits_file = to_path(v, b); }},
      {"output_dir", [](auto& c, auto&, auto& v, auto& b) { c.output_dir = to_path(v, b); }},
      {"min_len", [](auto& c, auto& k, auto& v, auto&) { c.min_len = to_int(k, v); }},
      {"split_train", [](auto& c, auto& k, auto& v, auto&) { c.split.train = to_double(k, v); }},
      {"split_val", [](auto& c, auto& k, auto& v, auto&) { c.split.val = to_double(k, v); }},
      {"split_test", [](auto& c, auto& k, auto& v, auto&) { c.split.test = to_double(k, v); }},
      {"seed", [](auto& c, auto& k, auto& v, auto&) { c.seed = to_u64(k, v); }},
      {"arch", [](auto& c, auto&, auto& v, auto&) { c.model.arch = parse_arch(v); }},
      {"embed_dim", [](auto& c, auto& k, auto& v, auto&) { c.model.embed_dim = to_int(k, v); }},
      {"num_layers", [](auto& c, auto& k, auto& v, auto&) { c.model.num_layers = to_int(k, v); }},
      {"num_heads", [](auto& c, auto& k, auto& v, auto&) { c.model.num_heads = to_int(k, v); }},
      {"hidden_dim", [](auto& c, auto& k, auto& v, auto&) { c.model.hidden_dim = to_int(k, v); }},
      {"alpha", [](auto& c, auto& k, auto& v, auto&) { c.model.alpha = to_double(k, v); }},
      {"learning_rate", [](auto& c, auto& k, auto& v, auto&) { c.model.learning_rate = to_double(k, v); }},
      {"epochs", [](auto& c, auto& k, auto& v, auto&) { c.model.epochs = to_int(k, v); }},
      {"strategy", [](auto& c, auto&, auto& v, auto&) { c.decode.strategy = parse_strategy(v); }},
      {"top_k", [](auto& c, auto& k, auto& v, auto&) { c.decode.top_k = to_int(k, v); }},
      {"top_p", [](auto& c, auto& k, auto& v, auto&) { c.decode.top_p = to_double(k, v); }},
      {"lambda", [](auto& c, auto& k, auto& v, auto&) { c.decode.lambda = to_double(k, v); }},
      {"adaptive_mode",
       [](auto& c, auto& k, auto& v, auto&) {
         if (v == "temperature") {
           c.decode.adaptive_mode = AdaptiveMode::kTemperature;
         } else if (v == "threshold") {
           c.decode.adaptive_mode = AdaptiveMode::kThreshold;
         } else {
           bad_value(k, v, "temperature|threshold");
         }
       }},
      {"no_repeat_mask", [](auto& c, auto& k, auto& v, auto&) { c.decode.no_repeat_mask = to_bool(k, v); }},
      {"guiding", [](auto& c, auto& k, auto& v, auto&) { c.guiding = to_bool(k, v); }},
      {"drifting", [](auto& c, auto& k, auto& v, auto&) { c.drifting = to_bool(k, v); }},
      {"adapting", [](auto& c, auto& k, auto& v, auto&) { c.adapting = to_bool(k, v); }},
      {"model", [](auto& c, auto& k, auto& v, auto&) { c.generator = parse_generator(k, v); }},
      {"repeats", [](auto& c, auto& k, auto& v, auto&) { c.repeats = to_int(k, v); }},
      {"jmax", [](auto& c, auto& k, auto& v, auto&) { c.jmax = to_int(k, v); }},
      {"sigma", [](auto& c, auto& k, auto& v, auto&) { c.sigma = to_double(k, v); }},
      {"report", [](auto& c, auto&, auto& v, auto&) { c.report = v; }},
  };
  return table;
}

}  // namespace

DecodeConfig ExperimentConfig::effective_decode() const {
  DecodeConfig d = decode;
  d.strategy = effective_strategy();
  d.seed = seed;
  return d;
}

void ExperimentConfig::validate() const {
  if (poi_file.empty()) throw Error("config: poi_file is required");
  if (visits_file.empty()) throw Error("config: visits_file is required");
  if (output_dir.empty()) throw Error("config: output_dir is empty");
  if (min_len < 3) throw Error("config: min_len must be >= 3");
  for (double r : {split.train, split.val, split.test}) {
    if (r < 0.0) throw Error("config: split ratios must be non-negative");
  }
  if (std::abs(split.train + split.val + split.test - 1.0) > 1e-9) throw Error("config: ratios must sum to 1");
  model.validate();
  DecodeConfig d = effective_decode();
  d.validate();
  if (d.top_k < 1) throw Error("config: top_k must be >= 1");
  if (repeats < 1) throw Error("config: repeats must be >= 1");
  if (jmax < 0) throw Error("config: jmax must be >= 0");
  if (sigma < 0.0) throw Error("config: sigma must be >= 0");
  if (report.empty() || fs::path(report).has_parent_path()) throw Error("config: report must be a plain file name");
  if (generator == GeneratorKind::kMarkov && d.strategy == Strategy::kAdaptive) {
    throw Error("config: model=markov cannot use adaptive decoding (set adapting=0)");
  }
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& [k, _] : setters()) out.push_back(k);
    return out;
  }();
  return keys;
}

Settings parse_config_text(std::string_view text, const std::string& origin) {
  Settings out;
  std::set<std::string> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw Error(where + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw Error(where + ": empty key");
    if (!seen.insert(key).second) throw Error(where + ": duplicate key '" + key + "'");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value, const fs::path& base) {
  for (const auto& [k, set] : setters()) {
    if (k == key) {
      set(cfg, key, value, base);
      return;
    }
  }
  throw Error("config: unknown key '" + key + "'");
}

ExperimentConfig load_config(const fs::path& path, const Settings& overrides, const char* env_output_dir) {
  ExperimentConfig cfg;
  const std::string text = csv::read_file(path);
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  for (const auto& [k, v] : parse_config_text(text, path.string())) {
    try {
      apply_setting(cfg, k, v, base);
    } catch (const Error& e) {
      throw Error(path.string() + ": " + e.what());
    }
  }
  if (env_output_dir != nullptr && *env_output_dir != '\0') cfg.output_dir = fs::path(env_output_dir);
  for (const auto& [k, v] : overrides) apply_setting(cfg, k, v);
  cfg.validate();
  return cfg;
}

Corpus load_corpus(const ExperimentConfig& cfg) {
  Corpus c{load_poi_catalog(cfg.poi_file), 0, 0, {}, {}, 0};
  VisitLoad v = load_visits(cfg.visits_file, c.catalog);
  c.visits = static_cast<int>(v.visits.size());
  c.dropped_unknown_poi = v.dropped_unknown_poi;
  c.trajectories = extract_trajectories(v.visits, c.catalog, cfg.min_len);
  c.split = split_corpus(c.trajectories, cfg.split, cfg.seed);
  for (const auto& t : c.split.train) c.m_max = std::max(c.m_max, t.length());
  return c;
}

namespace {

void check_inputs_exist(const ExperimentConfig& cfg) {
  for (const auto& p : {cfg.poi_file, cfg.visits_file}) {
    if (!fs::exists(p)) throw Error("input file not found: " + p.string());
  }
}

fs::path write_output(CommandResult& r, const ExperimentConfig& cfg, const std::string& name,
                      const std::string& content) {
  const fs::path p = cfg.output_dir / name;
  csv::write_file(p, content);
  r.written.push_back(p);
  return p;
}

std::vector<std::int64_t> vocabulary(const PoiCatalog& catalog) {
  std::vector<std::int64_t> ids;
  for (PoiIndex i = 0; i < catalog.size(); ++i) ids.push_back(catalog.id_of(i));
  return ids;
}

fs::path bundle_path(const ExperimentConfig& cfg) { return cfg.output_dir / "model.bundle"; }

/// The trained bundle, checked against the config and corpus it is used with.
ModelBundle load_matching_bundle(const ExperimentConfig& cfg, const Corpus& corpus) {
  const fs::path p = bundle_path(cfg);
  if (!fs::exists(p)) throw Error("model bundle not found: " + p.string() + " (run `artrip train` first)");
  ModelBundle b = load_bundle(p);
  if (b.vocab_ids != vocabulary(corpus.catalog)) throw Error("bundle vocabulary does not match " + cfg.poi_file.string());
  if (b.split_seed != cfg.seed) {
    throw Error("bundle was trained with seed " + std::to_string(b.split_seed) + ", config has seed " +
                std::to_string(cfg.seed));
  }
  if (b.guiding != cfg.guiding) {
    throw Error(std::string("bundle was trained with guiding=") + (b.guiding ? "1" : "0") + ", config has guiding=" +
                (cfg.guiding ? "1" : "0"));
  }
  return b;
}

/// Trip generator for the configured model kind. Holds its own state.
struct Generator {
  GeneratorKind kind;
  DecodeConfig decode;
  ModelBundle bundle;
  PopularityTable popularity;
  std::vector<TransitionMatrix> transitions;
  Warnings* warnings = nullptr;

  Trip operator()(const Query& q, Rng& rng) const {
    switch (kind) {
      case GeneratorKind::kPopularity:
        return popularity_decode(q, popularity);
      case GeneratorKind::kMarkov:
        return markov_decode(q, transitions, decode, rng);
      case GeneratorKind::kArtrip:
        break;
    }
    return decode_trip(q, bundle.params, bundle.guiding ? &bundle.guidance : nullptr, &bundle.confidence, decode, rng,
                       warnings);
  }
};

Generator make_generator(const ExperimentConfig& cfg, const Corpus& corpus, Warnings* warnings) {
  Generator g;
  g.kind = cfg.generator;
  g.decode = cfg.effective_decode();
  g.warnings = warnings;
  const int k = corpus.catalog.size();
  switch (cfg.generator) {
    case GeneratorKind::kArtrip:
      g.bundle = load_matching_bundle(cfg, corpus);
      break;
    case GeneratorKind::kPopularity:
      g.popularity = build_popularity(corpus.split.train, k);
      break;
    case GeneratorKind::kMarkov:
      g.transitions = empirical_transitions(corpus.split.train, k);
      break;
  }
  return g;
}

void dedup_warnings(Warnings& w) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (auto& s : w) {
    if (seen.insert(s).second) out.push_back(std::move(s));
  }
  w = std::move(out);
}

}  // namespace

CommandResult cmd_ingest(const ExperimentConfig& cfg) {
  cfg.validate();
  check_inputs_exist(cfg);
  const Corpus c = load_corpus(cfg);
  CommandResult r;

  std::string corpus = "traj_id,split,position,poi_id,timestamp\n";
  std::map<int, long> lengths;
  int traj_id = 0;
  const std::pair<const char*, const std::vector<Trajectory>*> parts[] = {
      {"train", &c.split.train}, {"val", &c.split.val}, {"test", &c.split.test}};
  for (const auto& [name, routes] : parts) {
    for (const auto& t : *routes) {
      for (int i = 0; i < t.length(); ++i) {
        corpus += std::to_string(traj_id) + "," + name + "," + std::to_string(i + 1) + "," +
                  std::to_string(c.catalog.id_of(t.pois[i])) + "," + std::to_string(t.times[i]) + "\n";
      }
      ++lengths[t.length()];
      ++traj_id;
    }
  }
  write_output(r, cfg, "corpus.csv", corpus);

  std::string summary = "key,value\n";
  summary += "pois," + std::to_string(c.catalog.size()) + "\n";
  summary += "visits," + std::to_string(c.visits) + "\n";
  summary += "dropped_unknown_poi," + std::to_string(c.dropped_unknown_poi) + "\n";
  summary += "trajectories," + std::to_string(c.trajectories.size()) + "\n";
  summary += "train," + std::to_string(c.split.train.size()) + "\n";
  summary += "val," + std::to_string(c.split.val.size()) + "\n";
  summary += "test," + std::to_string(c.split.test.size()) + "\n";
  summary += "m_max," + std::to_string(c.m_max) + "\n";
  write_output(r, cfg, "summary.csv", summary);

  std::string hist = "length,count\n";
  for (const auto& [len, count] : lengths) hist += std::to_string(len) + "," + std::to_string(count) + "\n";
  write_output(r, cfg, "length_histogram.csv", hist);
  return r;
}

CommandResult cmd_train(const ExperimentConfig& cfg) {
  cfg.validate();
  check_inputs_exist(cfg);
  const Corpus c = load_corpus(cfg);
  const int k = c.catalog.size();
  CommandResult r;

  ModelBundle b;
  b.config = cfg.model;
  b.config.seed = cfg.seed;
  b.split_seed = cfg.seed;
  b.guiding = cfg.guiding;
  b.drifting = cfg.drifting;
  b.vocab_ids = vocabulary(c.catalog);
  b.guidance = build_guidance_matrix(c.split.train, k);
  b.confidence = build_confidence(b.guidance, k);

  ModelConfig train_cfg = b.config;
  train_cfg.alpha = cfg.effective_alpha();
  TrainOptions options;
  options.guidance = cfg.guiding ? &b.guidance : nullptr;
  TrainResult trained = train(c.split, k, c.m_max, train_cfg, options);
  b.params = std::move(trained.params);

  write_output(r, cfg, "model.bundle", serialize_bundle(b));
  std::string trace = "epoch,mean_loss\n";
  for (std::size_t e = 0; e < trained.epoch_loss.size(); ++e) {
    trace += std::to_string(e + 1) + "," + csv::format_double(trained.epoch_loss[e]) + "\n";
  }
  write_output(r, cfg, "loss_trace.csv", trace);
  return r;
}

CommandResult cmd_evaluate(const ExperimentConfig& cfg) {
  cfg.validate();
  check_inputs_exist(cfg);
  const Corpus c = load_corpus(cfg);
  if (c.split.test.empty()) throw Error("evaluate: empty test split");
  CommandResult r;
  const Generator g = make_generator(cfg, c, &r.warnings);
  const MetricReport report = evaluate(std::cref(g), c.split.test, cfg.seed, cfg.repeats);
  write_output(r, cfg, cfg.report, to_csv(report));
  r.output = "f1=" + csv::format_double(report.f1.mean) + " pairs_f1=" + csv::format_double(report.pairs_f1.mean) +
             " rep=" + csv::format_double(report.rep.mean) + "\n";
  dedup_warnings(r.warnings);
  return r;
}

CommandResult cmd_recommend(const ExperimentConfig& cfg, const RecommendRequest& req) {
  cfg.validate();
  check_inputs_exist(cfg);
  if (req.length < 3) throw Error("recommend: length must be >= 3");
  if (req.count < 1) throw Error("recommend: count must be >= 1");
  if (req.start_time > req.end_time) throw Error("recommend: start time after end time");
  const Corpus c = load_corpus(cfg);
  Query q;
  q.start = c.catalog.index_of(req.start_poi);
  q.end = c.catalog.index_of(req.end_poi);
  q.start_time = req.start_time;
  q.end_time = req.end_time;
  q.length = req.length;

  CommandResult r;
  const Generator g = make_generator(cfg, c, &r.warnings);
  r.output = "query_id,position,poi_id\n";
  for (int i = 0; i < req.count; ++i) {
    Rng rng = query_rng(cfg.seed, static_cast<std::uint64_t>(i));
    const Trip trip = g(q, rng);
    for (std::size_t p = 0; p < trip.pois.size(); ++p) {
      r.output += std::to_string(i) + "," + std::to_string(p + 1) + "," + std::to_string(c.catalog.id_of(trip.pois[p])) +
                  "\n";
    }
  }
  dedup_warnings(r.warnings);
  return r;
}

CommandResult cmd_analyze(const ExperimentConfig& cfg) {
  cfg.validate();
  check_inputs_exist(cfg);
  const Corpus c = load_corpus(cfg);
  if (c.split.test.empty()) throw Error("analyze: empty test split");
  const int k = c.catalog.size();
  CommandResult r;
  const Generator g = make_generator(cfg, c, &r.warnings);

  std::vector<TransitionMatrix> ms = empirical_transitions(c.split.train, k);
  for (std::size_t i = 0; i < ms.size(); ++i) {
    ms[i] = perturb(ms[i], cfg.sigma, cfg.seed + i, &r.warnings);
  }
  write_output(r, cfg, "xi.csv", sparsity_csv(ms));
  const PmrResult series = pmr(ms, k, mean_sparsity(ms), cfg.jmax);
  write_output(r, cfg, "pmr.csv", pmr_csv(series));
  if (!series.convergent) r.warnings.push_back("pmr: terms did not decrease; series flagged non-convergent");

  std::vector<Trip> truth, generated;
  for (std::size_t i = 0; i < c.split.test.size(); ++i) {
    truth.push_back(Trip{c.split.test[i].pois});
    Rng rng = query_rng(cfg.seed, i);
    generated.push_back(g(make_query(c.split.test[i]), rng));
  }
  const RepetitionHistogram th = repeat_histogram(truth), mh = repeat_histogram(generated);
  write_output(r, cfg, "truth_repeat_position.csv", histogram_position_csv(th));
  write_output(r, cfg, "truth_repeat_gap.csv", histogram_gap_csv(th));
  write_output(r, cfg, "model_repeat_position.csv", histogram_position_csv(mh));
  write_output(r, cfg, "model_repeat_gap.csv", histogram_gap_csv(mh));
  dedup_warnings(r.warnings);
  return r;
}

}  // namespace artrip
