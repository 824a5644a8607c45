// SPDX-License-Identifier: Apache-2.0
//
// artrip <command> --config <path> [--<key> <value> ...]

#include <cstdlib>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "artrip/experiment.hpp"

namespace {

void report(const artrip::CommandResult& r) {
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << r.output;
  for (const auto& p : r.written) std::cerr << "wrote " << p.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"artrip: trip recommendation with repetition control"};
  app.require_subcommand(1);

  struct Sub {
    CLI::App* app = nullptr;
    std::string config;
    std::map<std::string, std::string> flags;
  };
  std::map<std::string, Sub> subs;
  artrip::RecommendRequest req;

  const std::pair<const char*, const char*> commands[] = {
      {"ingest", "Load raw files and write the normalized corpus and summaries"},
      {"train", "Train a model and write the bundle and loss trace"},
      {"evaluate", "Decode the test split and write the metric report"},
      {"recommend", "Generate trips for one query"},
      {"analyze", "Write sparsity, PMR and repeat-histogram CSVs"},
  };
  for (const auto& [name, help] : commands) {
    Sub& s = subs[name];
    s.app = app.add_subcommand(name, help);
    s.app->add_option("--config", s.config, "Experiment config file")->required();
    for (const auto& key : artrip::config_keys()) s.app->add_option("--" + key, s.flags[key], "Override `" + key + "`");
  }
  CLI::App* rec = subs["recommend"].app;
  rec->add_option("--start", req.start_poi, "Start POI id")->required();
  rec->add_option("--end", req.end_poi, "End POI id")->required();
  rec->add_option("--length", req.length, "Trip length n (>= 3)")->required();
  rec->add_option("--start-time", req.start_time, "Start time, unix seconds");
  rec->add_option("--end-time", req.end_time, "End time, unix seconds");
  rec->add_option("--count", req.count, "Number of trips");

  CLI11_PARSE(app, argc, argv);

  try {
    for (auto& [name, s] : subs) {
      if (!s.app->parsed()) continue;
      artrip::Settings overrides;
      for (const auto& key : artrip::config_keys()) {
        if (s.app->count("--" + key) > 0) overrides.emplace_back(key, s.flags[key]);
      }
      // A strategy named on the command line also decides the adapting switch.
      if (s.app->count("--strategy") > 0 && s.app->count("--adapting") == 0) {
        overrides.emplace_back("adapting", s.flags["strategy"] == "adaptive" ? "1" : "0");
      }
      const artrip::ExperimentConfig cfg =
          artrip::load_config(s.config, overrides, std::getenv("ARTRIP_OUTPUT_DIR"));
      if (name == "ingest") report(artrip::cmd_ingest(cfg));
      if (name == "train") report(artrip::cmd_train(cfg));
      if (name == "evaluate") report(artrip::cmd_evaluate(cfg));
      if (name == "recommend") report(artrip::cmd_recommend(cfg, req));
      if (name == "analyze") report(artrip::cmd_analyze(cfg));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
