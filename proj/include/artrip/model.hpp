// SPDX-License-Identifier: Apache-2.0
//
// Toy-scale sequence models for fixed-length trip generation:
//  - a one-shot encoder (pre-norm self-attention) that predicts every position
//    of the trip in a single pass from the two endpoint tokens, and
//  - an Elman-style recurrent decoder whose initial state encodes the query.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "artrip/autodiff.hpp"
#include "artrip/error.hpp"
#include "artrip/guidance.hpp"
#include "artrip/logits.hpp"
#include "artrip/trajectory_data.hpp"

namespace artrip {

enum class Arch { kOneShotEncoder, kRecurrent };

std::string_view to_string(Arch arch);
/// Accepts "one-shot-encoder" and "recurrent".
Arch parse_arch(std::string_view name);

inline constexpr int kTimeBuckets = 24;

struct ModelConfig {
  int embed_dim = 32;
  int num_layers = 2;
  int num_heads = 2;
  int hidden_dim = 64;
  double alpha = 1.0;
  double learning_rate = 1e-3;
  int epochs = 50;
  std::uint64_t seed = 1;
  Arch arch = Arch::kOneShotEncoder;

  /// Throws Error on an invalid combination.
  void validate() const;
};

struct ParamBlock {
  std::string name;
  Matrix value;
};

/// Parameter blocks in declaration order. The layout is fixed by the
/// architecture and the dimensions recorded here.
struct ModelParams {
  Arch arch = Arch::kOneShotEncoder;
  int num_pois = 0;
  int m_max = 0;
  int embed_dim = 0;
  int num_layers = 0;
  int num_heads = 0;
  int hidden_dim = 0;
  std::vector<ParamBlock> blocks;

  const Matrix& block(std::string_view name) const;
  Matrix& block(std::string_view name);
  int block_index(std::string_view name) const;
  std::size_t scalar_count() const;
  bool all_finite() const;
};

ModelParams init_params(const ModelConfig& cfg, int num_pois, int m_max);

/// Non-autoregressive pass: n x |P| logits for the query's n positions.
LogitMatrix forward_one_shot(const Query& q, const ModelParams& params);

struct RecurrentState {
  Matrix hidden;  // 1 x hidden_dim
  int position = 0;  // 0-based index of the row the next step produces
};

RecurrentState initial_state(const Query& q, const ModelParams& params);

/// One decoding step: logits for position state.position given the POI at
/// the previous position (p_s for the first step).
std::pair<LogitRow, RecurrentState> forward_recurrent_step(const RecurrentState& state, PoiIndex prev_poi,
                                                           const Query& q, const ModelParams& params);

/// Full teacher-forced pass for the recurrent model: row r is produced with
/// the ground-truth POI at position r-1 as input (p_s for r = 0).
LogitMatrix forward_recurrent_teacher(const Query& q, const std::vector<PoiIndex>& targets,
                                      const ModelParams& params);

/// Logits for training: one-shot pass, or teacher-forced recurrent pass.
LogitMatrix forward_logits(const Query& q, const std::vector<PoiIndex>& targets, const ModelParams& params);

namespace ad {
/// Tape handles for every parameter block, in declaration order.
std::vector<Var> bind_parameters(Tape& t, const ModelParams& params, bool trainable);
Var forward_logits(Tape& t, const std::vector<Var>& vars, const ModelParams& params, const Query& q,
                   const std::vector<PoiIndex>& targets);
/// Guided logits -> L_rec + alpha * L_rep as a 1x1 node.
Var objective(Tape& t, const std::vector<Var>& vars, const ModelParams& params, const Query& q,
              const std::vector<PoiIndex>& targets, const GuidanceMatrix* guidance, double alpha);
}  // namespace ad

/// Loss and per-block gradients for one example.
struct LossAndGrad {
  double loss = 0.0;
  std::vector<Matrix> grads;
};
LossAndGrad loss_and_grad(const ModelParams& params, const Query& q, const Trajectory& target,
                          const GuidanceMatrix* guidance, double alpha);
double example_loss(const ModelParams& params, const Query& q, const Trajectory& target,
                    const GuidanceMatrix* guidance, double alpha);

struct TrainOptions {
  /// nullptr disables guiding during training.
  const GuidanceMatrix* guidance = nullptr;
};

struct TrainResult {
  ModelParams params;
  std::vector<double> epoch_loss;  // mean total loss per epoch
};

/// Per trajectory: forward, guidance, total loss, one Adam step.
TrainResult train(const CorpusSplit& split, int num_pois, int m_max, const ModelConfig& cfg,
                  const TrainOptions& options = {});

struct GradCheckOptions {
  double step = 1e-4;
  double tol = 1e-4;
  /// Added to one analytic gradient entry before comparison: (block, flat index, delta).
  struct Corruption {
    int block = 0;
    Eigen::Index index = 0;
    double delta = 0.1;
  };
  std::optional<Corruption> corrupt;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::vector<std::pair<std::string, double>> per_block;  // block name, max relative error
  std::size_t entries_checked = 0;
  bool pass = false;
};

/// Central finite differences against tape gradients on every parameter entry.
/// Relative error is |a - n| / max(|a|, |n|, 1e-6).
GradCheckReport grad_check(const ModelParams& params, const Query& q, const Trajectory& target,
                           const GuidanceMatrix* guidance, double alpha, const GradCheckOptions& options = {});

}  // namespace artrip
