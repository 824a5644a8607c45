// SPDX-License-Identifier: Apache-2.0

#include "artrip/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "artrip/losses.hpp"

namespace artrip {

std::string_view to_string(Arch arch) {
  return arch == Arch::kRecurrent ? "recurrent" : "one-shot-encoder";
}

Arch parse_arch(std::string_view name) {
  if (name == "one-shot-encoder" || name == "one_shot_encoder" || name == "one-shot") {
    return Arch::kOneShotEncoder;
  }
  if (name == "recurrent" || name == "rnn") return Arch::kRecurrent;
  throw Error("unknown arch '" + std::string(name) + "' (expected one-shot-encoder|recurrent)");
}

void ModelConfig::validate() const {
  if (embed_dim <= 0 || num_heads <= 0 || hidden_dim <= 0 || num_layers < 0) {
    throw Error("model config: dimensions must be positive");
  }
  if (embed_dim % num_heads != 0) {
    throw Error("model config: embed_dim " + std::to_string(embed_dim) + " not divisible by num_heads " +
                std::to_string(num_heads));
  }
  if (alpha < 0.0) throw Error("model config: alpha must be >= 0");
  if (!(learning_rate > 0.0)) throw Error("model config: learning_rate must be > 0");
  if (epochs < 0) throw Error("model config: epochs must be >= 0");
}

const Matrix& ModelParams::block(std::string_view name) const { return blocks.at(block_index(name)).value; }

Matrix& ModelParams::block(std::string_view name) { return blocks.at(block_index(name)).value; }

int ModelParams::block_index(std::string_view name) const {
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].name == name) return static_cast<int>(i);
  }
  throw Error("no parameter block '" + std::string(name) + "'");
}

std::size_t ModelParams::scalar_count() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += static_cast<std::size_t>(b.value.size());
  return n;
}

bool ModelParams::all_finite() const {
  return std::all_of(blocks.begin(), blocks.end(), [](const ParamBlock& b) { return b.value.allFinite(); });
}

namespace {

// Fixed block positions shared by both architectures.
constexpr int kPoiEmb = 0;
constexpr int kTimeEmb = 1;
constexpr int kPosEmb = 2;

// Encoder layout.
constexpr int kMaskToken = 3;
constexpr int kFirstLayer = 4;
constexpr int kPerLayer = 12;
enum LayerBlock { kLn1Gain, kLn1Bias, kWq, kWk, kWv, kWo, kLn2Gain, kLn2Bias, kFfW1, kFfB1, kFfW2, kFfB2 };

// Recurrent layout.
enum RnnBlock { kInitW = 3, kInitB, kWxh, kWhh, kBh, kRnnHeadW, kRnnHeadB };

int encoder_tail(const ModelParams& p) { return kFirstLayer + kPerLayer * p.num_layers; }

int position_index(const ModelParams& p, int position) { return std::min(position, p.m_max - 1); }

}  // namespace

ModelParams init_params(const ModelConfig& cfg, int num_pois, int m_max) {
  cfg.validate();
  if (num_pois <= 0) throw Error("empty vocabulary");
  if (m_max <= 0) throw Error("init_params: m_max must be positive");

  ModelParams p;
  p.arch = cfg.arch;
  p.num_pois = num_pois;
  p.m_max = m_max;
  p.embed_dim = cfg.embed_dim;
  p.num_layers = cfg.arch == Arch::kOneShotEncoder ? cfg.num_layers : 0;
  p.num_heads = cfg.num_heads;
  p.hidden_dim = cfg.hidden_dim;

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(cfg.embed_dim)));
  auto random = [&](Eigen::Index r, Eigen::Index c) {
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
    return m;
  };
  auto add = [&](std::string name, Matrix value) { p.blocks.push_back({std::move(name), std::move(value)}); };

  const int d = cfg.embed_dim;
  const int h = cfg.hidden_dim;
  add("poi_embeddings", random(num_pois, d));
  add("time_embeddings", random(kTimeBuckets, d));
  add("position_embeddings", random(m_max, d));

  if (cfg.arch == Arch::kOneShotEncoder) {
    add("mask_token", random(1, d));
    for (int l = 0; l < cfg.num_layers; ++l) {
      const std::string pre = "layer" + std::to_string(l) + ".";
      add(pre + "ln1_gain", Matrix::Ones(1, d));
      add(pre + "ln1_bias", Matrix::Zero(1, d));
      add(pre + "wq", random(d, d));
      add(pre + "wk", random(d, d));
      add(pre + "wv", random(d, d));
      add(pre + "wo", random(d, d));
      add(pre + "ln2_gain", Matrix::Ones(1, d));
      add(pre + "ln2_bias", Matrix::Zero(1, d));
      add(pre + "ff_w1", random(d, h));
      add(pre + "ff_b1", Matrix::Zero(1, h));
      add(pre + "ff_w2", random(h, d));
      add(pre + "ff_b2", Matrix::Zero(1, d));
    }
    add("final_ln_gain", Matrix::Ones(1, d));
    add("final_ln_bias", Matrix::Zero(1, d));
    add("head_w", random(d, num_pois));
    add("head_b", Matrix::Zero(1, num_pois));
  } else {
    add("init_w", random(2 * d, h));
    add("init_b", Matrix::Zero(1, h));
    add("w_xh", random(d, h));
    add("w_hh", random(h, h));
    add("b_h", Matrix::Zero(1, h));
    add("head_w", random(h, num_pois));
    add("head_b", Matrix::Zero(1, num_pois));
  }
  return p;
}

namespace ad {

std::vector<Var> bind_parameters(Tape& t, const ModelParams& params, bool trainable) {
  std::vector<Var> vars;
  vars.reserve(params.blocks.size());
  for (const auto& b : params.blocks) vars.push_back(trainable ? t.parameter(b.value) : t.constant_ref(b.value));
  return vars;
}

namespace {

Var encoder_forward(Tape& t, const std::vector<Var>& v, const ModelParams& p, const Query& q) {
  const int n = q.length;
  if (n < 2) throw Error("forward_one_shot: query length must be >= 2");
  std::vector<int> tokens(n, -1), mask(n, 0), times(n, -1), positions(n);
  tokens.front() = q.start;
  tokens.back() = q.end;
  mask.front() = mask.back() = -1;
  times.front() = hour_bucket(q.start_time);
  times.back() = hour_bucket(q.end_time);
  for (int r = 0; r < n; ++r) positions[r] = position_index(p, r);

  Var x = add(t, gather_rows(t, v[kPoiEmb], tokens), gather_rows(t, v[kMaskToken], mask));
  x = add(t, x, gather_rows(t, v[kTimeEmb], times));
  x = add(t, x, gather_rows(t, v[kPosEmb], positions));

  const int d = p.embed_dim;
  const int dh = d / p.num_heads;
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
  for (int l = 0; l < p.num_layers; ++l) {
    auto w = [&](int which) { return v[kFirstLayer + kPerLayer * l + which]; };
    Var a = layer_norm(t, x, w(kLn1Gain), w(kLn1Bias));
    Var qm = matmul(t, a, w(kWq));
    Var km = matmul(t, a, w(kWk));
    Var vm = matmul(t, a, w(kWv));
    std::vector<Var> heads;
    for (int hd = 0; hd < p.num_heads; ++hd) {
      Var qh = col_block(t, qm, hd * dh, dh);
      Var kh = col_block(t, km, hd * dh, dh);
      Var vh = col_block(t, vm, hd * dh, dh);
      Var attn = softmax_rows(t, scale(t, matmul_nt(t, qh, kh), inv_sqrt_dh));
      heads.push_back(matmul(t, attn, vh));
    }
    Var merged = heads.size() == 1 ? heads[0] : concat_cols(t, heads);
    x = add(t, x, matmul(t, merged, w(kWo)));

    Var b = layer_norm(t, x, w(kLn2Gain), w(kLn2Bias));
    Var f = gelu(t, add_row(t, matmul(t, b, w(kFfW1)), w(kFfB1)));
    x = add(t, x, add_row(t, matmul(t, f, w(kFfW2)), w(kFfB2)));
  }
  const int tail = encoder_tail(p);
  Var z = layer_norm(t, x, v[tail], v[tail + 1]);
  return add_row(t, matmul(t, z, v[tail + 2]), v[tail + 3]);
}

Var rnn_initial(Tape& t, const std::vector<Var>& v, const ModelParams& p, const Query& q) {
  Var start = add(t, gather_rows(t, v[kPoiEmb], {q.start}), gather_rows(t, v[kTimeEmb], {hour_bucket(q.start_time)}));
  Var end = add(t, gather_rows(t, v[kPoiEmb], {q.end}), gather_rows(t, v[kTimeEmb], {hour_bucket(q.end_time)}));
  // The requested length enters through the position embedding of the last slot.
  end = add(t, end, gather_rows(t, v[kPosEmb], {position_index(p, q.length - 1)}));
  Var qv = concat_cols(t, {start, end});
  return tanh(t, add_row(t, matmul(t, qv, v[kInitW]), v[kInitB]));
}

// Returns {logits row, next hidden}.
std::pair<Var, Var> rnn_step(Tape& t, const std::vector<Var>& v, const ModelParams& p, Var hidden, PoiIndex prev,
                             int position) {
  Var x = add(t, gather_rows(t, v[kPoiEmb], {prev}), gather_rows(t, v[kPosEmb], {position_index(p, position)}));
  Var pre = add(t, matmul(t, x, v[kWxh]), matmul(t, hidden, v[kWhh]));
  Var next = tanh(t, add_row(t, pre, v[kBh]));
  Var logits = add_row(t, matmul(t, next, v[kRnnHeadW]), v[kRnnHeadB]);
  return {logits, next};
}

Var rnn_teacher(Tape& t, const std::vector<Var>& v, const ModelParams& p, const Query& q,
                const std::vector<PoiIndex>& targets) {
  if (static_cast<int>(targets.size()) != q.length) throw Error("recurrent forward: target length mismatch");
  Var hidden = rnn_initial(t, v, p, q);
  std::vector<Var> rows;
  rows.reserve(targets.size());
  for (int r = 0; r < q.length; ++r) {
    const PoiIndex prev = r == 0 ? q.start : targets[r - 1];
    auto [logits, next] = rnn_step(t, v, p, hidden, prev, r);
    rows.push_back(logits);
    hidden = next;
  }
  return stack_rows(t, rows);
}

}  // namespace

Var forward_logits(Tape& t, const std::vector<Var>& vars, const ModelParams& params, const Query& q,
                   const std::vector<PoiIndex>& targets) {
  if (params.arch == Arch::kOneShotEncoder) return encoder_forward(t, vars, params, q);
  return rnn_teacher(t, vars, params, q, targets);
}

Var objective(Tape& t, const std::vector<Var>& vars, const ModelParams& params, const Query& q,
              const std::vector<PoiIndex>& targets, const GuidanceMatrix* guidance, double alpha) {
  Var h = forward_logits(t, vars, params, q, targets);
  if (guidance != nullptr) h = mul_const(t, h, guidance_factor(*guidance, q.length));
  Var loss = cross_entropy(t, h, targets);
  if (alpha > 0.0 && q.length >= 2) loss = add(t, loss, scale(t, drift_penalty(t, h), alpha));
  return loss;
}

}  // namespace ad

LogitMatrix forward_one_shot(const Query& q, const ModelParams& params) {
  if (params.arch != Arch::kOneShotEncoder) throw Error("forward_one_shot: model is not a one-shot encoder");
  ad::Tape t;
  auto vars = ad::bind_parameters(t, params, false);
  return t.value(ad::forward_logits(t, vars, params, q, {}));
}

RecurrentState initial_state(const Query& q, const ModelParams& params) {
  if (params.arch != Arch::kRecurrent) throw Error("initial_state: model is not recurrent");
  ad::Tape t;
  auto vars = ad::bind_parameters(t, params, false);
  return RecurrentState{t.value(ad::rnn_initial(t, vars, params, q)), 0};
}

std::pair<LogitRow, RecurrentState> forward_recurrent_step(const RecurrentState& state, PoiIndex prev_poi,
                                                           const Query& /*q*/, const ModelParams& params) {
  if (params.arch != Arch::kRecurrent) throw Error("forward_recurrent_step: model is not recurrent");
  if (prev_poi < 0 || prev_poi >= params.num_pois) throw Error("forward_recurrent_step: POI index out of range");
  ad::Tape t;
  auto vars = ad::bind_parameters(t, params, false);
  ad::Var hidden = t.constant_ref(state.hidden);
  auto [logits, next] = ad::rnn_step(t, vars, params, hidden, prev_poi, state.position);
  return {t.value(logits).row(0), RecurrentState{t.value(next), state.position + 1}};
}

LogitMatrix forward_recurrent_teacher(const Query& q, const std::vector<PoiIndex>& targets,
                                      const ModelParams& params) {
  if (params.arch != Arch::kRecurrent) throw Error("forward_recurrent_teacher: model is not recurrent");
  ad::Tape t;
  auto vars = ad::bind_parameters(t, params, false);
  return t.value(ad::forward_logits(t, vars, params, q, targets));
}

LogitMatrix forward_logits(const Query& q, const std::vector<PoiIndex>& targets, const ModelParams& params) {
  ad::Tape t;
  auto vars = ad::bind_parameters(t, params, false);
  return t.value(ad::forward_logits(t, vars, params, q, targets));
}

LossAndGrad loss_and_grad(const ModelParams& params, const Query& q, const Trajectory& target,
                          const GuidanceMatrix* guidance, double alpha) {
  ad::Tape t;
  auto vars = ad::bind_parameters(t, params, true);
  ad::Var loss = ad::objective(t, vars, params, q, target.pois, guidance, alpha);
  t.backward(loss);
  LossAndGrad out;
  out.loss = t.value(loss)(0, 0);
  out.grads.reserve(vars.size());
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const Matrix& g = t.grad(vars[i]);
    const Matrix& shape = params.blocks[i].value;
    out.grads.push_back(g.size() == 0 ? Matrix::Zero(shape.rows(), shape.cols()) : g);
  }
  return out;
}

double example_loss(const ModelParams& params, const Query& q, const Trajectory& target,
                    const GuidanceMatrix* guidance, double alpha) {
  ad::Tape t;
  auto vars = ad::bind_parameters(t, params, false);
  return t.value(ad::objective(t, vars, params, q, target.pois, guidance, alpha))(0, 0);
}

TrainResult train(const CorpusSplit& split, int num_pois, int m_max, const ModelConfig& cfg,
                  const TrainOptions& options) {
  if (split.train.empty()) throw Error("train: empty training split");
  for (const auto& t : split.train) validate(t, num_pois);

  TrainResult result;
  result.params = init_params(cfg, num_pois, m_max);
  ModelParams& params = result.params;

  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  std::vector<Matrix> first, second;
  for (const auto& b : params.blocks) {
    first.push_back(Matrix::Zero(b.value.rows(), b.value.cols()));
    second.push_back(Matrix::Zero(b.value.rows(), b.value.cols()));
  }

  // Shuffling draws from its own stream so initialization and order are independent.
  std::mt19937_64 order_rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<std::size_t> order(split.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  long step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);
    double epoch_sum = 0.0;
    for (std::size_t idx : order) {
      const Trajectory& traj = split.train[idx];
      const Query q = make_query(traj);
      LossAndGrad lg = loss_and_grad(params, q, traj, options.guidance, cfg.alpha);
      if (!std::isfinite(lg.loss)) {
        throw Error("train: non-finite loss at epoch " + std::to_string(epoch + 1) + ", trajectory " +
                    std::to_string(idx));
      }
      epoch_sum += lg.loss;
      ++step;
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      for (std::size_t b = 0; b < params.blocks.size(); ++b) {
        const Matrix& g = lg.grads[b];
        first[b] = kBeta1 * first[b] + (1.0 - kBeta1) * g;
        second[b] = kBeta2 * second[b] + (1.0 - kBeta2) * g.cwiseProduct(g);
        params.blocks[b].value.array() -=
            cfg.learning_rate * (first[b].array() / c1) / ((second[b].array() / c2).sqrt() + kEps);
      }
    }
    result.epoch_loss.push_back(epoch_sum / static_cast<double>(split.train.size()));
  }
  return result;
}

GradCheckReport grad_check(const ModelParams& params, const Query& q, const Trajectory& target,
                           const GuidanceMatrix* guidance, double alpha, const GradCheckOptions& options) {
  LossAndGrad analytic = loss_and_grad(params, q, target, guidance, alpha);
  if (options.corrupt) {
    analytic.grads.at(options.corrupt->block).data()[options.corrupt->index] += options.corrupt->delta;
  }

  GradCheckReport report;
  ModelParams probe = params;
  for (std::size_t b = 0; b < probe.blocks.size(); ++b) {
    Matrix& value = probe.blocks[b].value;
    double block_max = 0.0;
    for (Eigen::Index i = 0; i < value.size(); ++i) {
      const double saved = value.data()[i];
      value.data()[i] = saved + options.step;
      const double up = example_loss(probe, q, target, guidance, alpha);
      value.data()[i] = saved - options.step;
      const double down = example_loss(probe, q, target, guidance, alpha);
      value.data()[i] = saved;

      const double numeric = (up - down) / (2.0 * options.step);
      const double a = analytic.grads[b].data()[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
      block_max = std::max(block_max, std::abs(a - numeric) / denom);
      ++report.entries_checked;
    }
    report.per_block.emplace_back(probe.blocks[b].name, block_max);
    report.max_rel_error = std::max(report.max_rel_error, block_max);
  }
  report.pass = report.max_rel_error <= options.tol;
  return report;
}

}  // namespace artrip
