// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration and the five operator commands behind the
// `artrip` binary.
//
// Config grammar: one `key = value` per line; `#` starts a comment; blank
// lines ignored; keys are unique. Relative paths are resolved against the
// config file's directory. Precedence, lowest to highest: defaults, file,
// ARTRIP_OUTPUT_DIR (output_dir only), command-line flags.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "artrip/decoding.hpp"
#include "artrip/error.hpp"
#include "artrip/model.hpp"
#include "artrip/trajectory_data.hpp"

namespace artrip {

enum class GeneratorKind { kArtrip, kPopularity, kMarkov };

struct ExperimentConfig {
  std::filesystem::path poi_file;
  std::filesystem::path visits_file;
  std::filesystem::path output_dir = "artrip-out";
  int min_len = 3;
  SplitRatios split;
  std::uint64_t seed = 1;
  ModelConfig model;
  DecodeConfig decode;
  bool guiding = true;
  bool drifting = true;
  bool adapting = true;
  GeneratorKind generator = GeneratorKind::kArtrip;
  int repeats = 5;
  int jmax = 10;
  double sigma = 0.0;
  std::string report = "report.csv";

  /// Strategy used at decode time: adaptive whenever `adapting` is on.
  Strategy effective_strategy() const { return adapting ? Strategy::kAdaptive : decode.strategy; }
  /// Drift weight used in training: 0 when `drifting` is off.
  double effective_alpha() const { return drifting ? model.alpha : 0.0; }
  DecodeConfig effective_decode() const;

  /// Semantic checks that need no file access.
  void validate() const;
};

using Settings = std::vector<std::pair<std::string, std::string>>;

/// Every accepted key, in documentation order.
const std::vector<std::string>& config_keys();

Settings parse_config_text(std::string_view text, const std::string& origin);

/// Throws Error naming the key for unknown keys and malformed values.
/// `base` resolves relative path values.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value,
                   const std::filesystem::path& base = {});

/// Defaults <- file <- env_output_dir <- overrides, then validate().
ExperimentConfig load_config(const std::filesystem::path& path, const Settings& overrides = {},
                             const char* env_output_dir = nullptr);

/// Catalog, routes and the seeded split for a config.
struct Corpus {
  PoiCatalog catalog;
  int visits = 0;
  int dropped_unknown_poi = 0;
  std::vector<Trajectory> trajectories;
  CorpusSplit split;
  int m_max = 0;  // longest training route
};

Corpus load_corpus(const ExperimentConfig& cfg);

struct CommandResult {
  std::vector<std::filesystem::path> written;
  Warnings warnings;
  std::string output;  // text for stdout
};

/// corpus.csv, summary.csv, length_histogram.csv.
CommandResult cmd_ingest(const ExperimentConfig& cfg);
/// model.bundle, loss_trace.csv.
CommandResult cmd_train(const ExperimentConfig& cfg);
/// The metric report named by `report`.
CommandResult cmd_evaluate(const ExperimentConfig& cfg);

struct RecommendRequest {
  std::int64_t start_poi = 0;
  std::int64_t end_poi = 0;
  int length = 0;
  Timestamp start_time = 9 * 3600;
  Timestamp end_time = 17 * 3600;
  int count = 1;
};

/// Trips as `query_id,position,poi_id` with catalog ids, in `output`.
CommandResult cmd_recommend(const ExperimentConfig& cfg, const RecommendRequest& request);

/// xi.csv, pmr.csv and truth_/model_ repeat_position.csv / repeat_gap.csv.
CommandResult cmd_analyze(const ExperimentConfig& cfg);

}  // namespace artrip
