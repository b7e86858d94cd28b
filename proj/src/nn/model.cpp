#include "mad/nn/model.hpp"

#include <cmath>

#include "mad/error.hpp"

namespace mad::nn {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::lstm:
      return "lstm";
    case ModelKind::tcn:
      return "tcn";
    case ModelKind::attn_enc:
      return "attn_enc";
  }
  return "unknown";
}

std::string to_string(Task task) {
  switch (task) {
    case Task::mad:
      return "mad";
    case Task::nsp:
      return "nsp";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "lstm") return ModelKind::lstm;
  if (name == "tcn") return ModelKind::tcn;
  if (name == "attn_enc" || name == "attn-enc") return ModelKind::attn_enc;
  throw usage_error("unknown model kind '" + name + "'");
}

Task parse_task(const std::string& name) {
  if (name == "mad") return Task::mad;
  if (name == "nsp") return Task::nsp;
  throw usage_error("unknown task '" + name + "'");
}

ModelConfig ModelConfig::defaults(ModelKind kind, std::size_t input_dim) {
  ModelConfig c;
  c.kind = kind;
  c.input_dim = input_dim;
  switch (kind) {
    case ModelKind::lstm:
      c.hidden = 50;
      c.layers = 2;
      c.dropout = 0.0;
      break;
    case ModelKind::tcn:
      c.hidden = 50;
      c.layers = 2;
      c.kernel = 7;
      c.dropout = 0.2;
      break;
    case ModelKind::attn_enc:
      c.d_model = 32;
      c.ff_dim = 128;
      c.heads = 4;
      c.layers = 2;
      c.dropout = 0.1;
      break;
  }
  return c;
}

void ModelConfig::validate() const {
  if (input_dim == 0) throw usage_error("model: input_dim must be positive");
  if (layers == 0) throw usage_error("model: layers must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw usage_error("model: dropout must lie in [0, 1)");
  }
  switch (kind) {
    case ModelKind::lstm:
      if (hidden == 0) throw usage_error("model: hidden must be positive");
      break;
    case ModelKind::tcn:
      if (hidden == 0 || kernel == 0) {
        throw usage_error("model: tcn channels and kernel must be positive");
      }
      break;
    case ModelKind::attn_enc:
      if (d_model == 0 || ff_dim == 0 || heads == 0 || d_model % heads != 0) {
        throw usage_error("model: d_model must be a positive multiple of heads");
      }
      break;
  }
}

void SequenceModel::add_param(std::string name, std::size_t rows,
                              std::size_t cols, double bound, Rng& rng) {
  Parameter p{std::move(name), Matrix(rows, cols), Matrix(rows, cols)};
  for (auto& v : p.value.values()) v = bound * (2.0 * uniform01(rng) - 1.0);
  params_.push_back(std::move(p));
}

void SequenceModel::add_constant_param(std::string name, std::size_t cols,
                                       double value) {
  params_.push_back(
      Parameter{std::move(name), Matrix(1, cols, value), Matrix(1, cols)});
}

SequenceModel::SequenceModel(const ModelConfig& config) : config_(config) {
  config_.validate();
  Rng rng(derive_seed(config_.init_seed, "init"));
  auto fan = [](std::size_t fan_in) {
    return 1.0 / std::sqrt(static_cast<double>(fan_in));
  };
  const std::size_t n = config_.input_dim;
  switch (config_.kind) {
    case ModelKind::lstm: {
      const std::size_t h = config_.hidden;
      std::size_t in = n;
      for (std::size_t l = 0; l < config_.layers; ++l) {
        const std::string pre = "lstm." + std::to_string(l) + ".";
        add_param(pre + "w_ih", in, 4 * h, fan(in), rng);
        add_param(pre + "w_hh", h, 4 * h, fan(h), rng);
        add_param(pre + "b", 1, 4 * h, fan(h), rng);
        in = h;
      }
      add_param("head.w", h, n, fan(h), rng);
      add_param("head.b", 1, n, fan(h), rng);
      break;
    }
    case ModelKind::tcn: {
      const std::size_t c = config_.hidden, k = config_.kernel;
      std::size_t in = n;
      for (std::size_t l = 0; l < config_.layers; ++l) {
        const std::string pre = "tcn." + std::to_string(l) + ".";
        add_param(pre + "w", k * in, c, fan(k * in), rng);
        add_param(pre + "b", 1, c, fan(k * in), rng);
        if (in != c) add_param(pre + "w_res", in, c, fan(in), rng);
        in = c;
      }
      add_param("head.w", c, n, fan(c), rng);
      add_param("head.b", 1, n, fan(c), rng);
      break;
    }
    case ModelKind::attn_enc: {
      const std::size_t d = config_.d_model, ff = config_.ff_dim;
      add_param("embed.w", n, d, fan(n), rng);
      add_param("embed.b", 1, d, fan(n), rng);
      for (std::size_t l = 0; l < config_.layers; ++l) {
        const std::string pre = "enc." + std::to_string(l) + ".";
        add_param(pre + "w_q", d, d, fan(d), rng);
        add_param(pre + "b_q", 1, d, fan(d), rng);
        // A key bias shifts every score of a query equally and cancels in the
        // softmax, so keys are projected without one.
        add_param(pre + "w_k", d, d, fan(d), rng);
        add_param(pre + "w_v", d, d, fan(d), rng);
        add_param(pre + "b_v", 1, d, fan(d), rng);
        add_param(pre + "w_o", d, d, fan(d), rng);
        add_param(pre + "b_o", 1, d, fan(d), rng);
        add_constant_param(pre + "ln1.gamma", d, 1.0);
        add_constant_param(pre + "ln1.beta", d, 0.0);
        add_param(pre + "w_ff1", d, ff, fan(d), rng);
        add_param(pre + "b_ff1", 1, ff, fan(d), rng);
        add_param(pre + "w_ff2", ff, d, fan(ff), rng);
        add_param(pre + "b_ff2", 1, d, fan(ff), rng);
        add_constant_param(pre + "ln2.gamma", d, 1.0);
        add_constant_param(pre + "ln2.beta", d, 0.0);
      }
      add_param("head.w", d, n, fan(d), rng);
      add_param("head.b", 1, n, fan(d), rng);
      break;
    }
  }
}

std::size_t SequenceModel::parameter_count() const {
  std::size_t total = 0;
  for (const auto& p : params_) total += p.value.size();
  return total;
}

void SequenceModel::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

void SequenceModel::load_parameters(const std::vector<Parameter>& params) {
  if (params.size() != params_.size()) {
    throw data_error("parameter count mismatch: expected " +
                     std::to_string(params_.size()) + ", got " +
                     std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].name != params_[i].name) {
      throw data_error("parameter name mismatch: expected '" +
                       params_[i].name + "', got '" + params[i].name + "'");
    }
    if (!params[i].value.same_shape(params_[i].value)) {
      throw data_error("parameter shape mismatch for '" + params_[i].name + "'");
    }
    params_[i].value = params[i].value;
  }
}

Var SequenceModel::forward(Tape& tape, Var input, std::size_t batch,
                           std::size_t steps, Rng* dropout_rng) {
  std::vector<Var> p;
  p.reserve(params_.size());
  for (auto& param : params_) p.push_back(tape.param(param));
  return forward_impl(tape, p, input, batch, steps, dropout_rng);
}

SequenceBatch SequenceModel::forward(const SequenceBatch& input,
                                     Rng* dropout_rng) const {
  Tape tape(false);
  std::vector<Var> p;
  p.reserve(params_.size());
  for (const auto& param : params_) p.push_back(tape.constant(param.value));
  const Var x = tape.constant(input.data);
  const Var y =
      forward_impl(tape, p, x, input.batch, input.steps, dropout_rng);
  return SequenceBatch{input.batch, input.steps, tape.value(y)};
}

Var SequenceModel::forward_impl(Tape& tape, std::span<const Var> p, Var input,
                                std::size_t batch, std::size_t steps,
                                Rng* rng) const {
  const Matrix& x = tape.value(input);
  if (x.cols() != config_.input_dim) {
    throw usage_error("model expects " + std::to_string(config_.input_dim) +
                      " channels, input has " + std::to_string(x.cols()));
  }
  if (batch == 0 || steps == 0 || x.rows() != batch * steps) {
    throw usage_error("input rows do not match batch x steps");
  }
  if (train_mode_ && config_.dropout > 0.0 && rng == nullptr) {
    throw usage_error("train-mode forward with dropout needs an RNG");
  }
  Rng* active = train_mode_ ? rng : nullptr;
  switch (config_.kind) {
    case ModelKind::lstm:
      return forward_lstm(tape, p, input, batch, steps, active);
    case ModelKind::tcn:
      return forward_tcn(tape, p, input, batch, steps, active);
    case ModelKind::attn_enc:
      return forward_attn(tape, p, input, batch, steps, active);
  }
  throw usage_error("unknown model kind");
}

namespace {

Var maybe_dropout(Tape& t, Var x, double rate, Rng* rng) {
  return rng ? dropout(t, x, rate, *rng) : x;
}

Var linear(Tape& t, Var x, Var w, Var b) {
  return add_bias(t, matmul(t, x, w), b);
}

}  // namespace

Var SequenceModel::forward_lstm(Tape& t, std::span<const Var> p, Var x,
                                std::size_t batch, std::size_t steps,
                                Rng* rng) const {
  Var seq = x;
  std::size_t idx = 0;
  for (std::size_t l = 0; l < config_.layers; ++l) {
    const Var w_ih = p[idx++], w_hh = p[idx++], b = p[idx++];
    // Input contributions for all steps in one product.
    const Var xw = add_bias(t, matmul(t, seq, w_ih), b);
    std::vector<Var> hs;
    hs.reserve(steps);
    Var hprev, cprev;
    for (std::size_t s = 0; s < steps; ++s) {
      Var z = take_step(t, xw, batch, steps, s);
      if (s > 0) z = add(t, z, matmul(t, hprev, w_hh));
      const auto [hn, c] = lstm_cell(t, z, cprev);
      hs.push_back(hn);
      hprev = hn;
      cprev = c;
    }
    seq = maybe_dropout(t, stack_steps(t, hs, batch), config_.dropout, rng);
  }
  return linear(t, seq, p[idx], p[idx + 1]);
}

Var SequenceModel::forward_tcn(Tape& t, std::span<const Var> p, Var x,
                               std::size_t batch, std::size_t steps,
                               Rng* rng) const {
  Var seq = x;
  std::size_t in = config_.input_dim;
  std::size_t idx = 0;
  std::size_t dilation = 1;
  for (std::size_t l = 0; l < config_.layers; ++l) {
    const Var w = p[idx++], b = p[idx++];
    const Var cols = causal_unfold(t, seq, batch, steps, config_.kernel, dilation);
    Var act = gelu(t, linear(t, cols, w, b));
    act = maybe_dropout(t, act, config_.dropout, rng);
    const Var residual = in != config_.hidden ? matmul(t, seq, p[idx++]) : seq;
    seq = add(t, act, residual);
    in = config_.hidden;
    dilation *= 2;
  }
  return linear(t, seq, p[idx], p[idx + 1]);
}

Var SequenceModel::forward_attn(Tape& t, std::span<const Var> p, Var x,
                                std::size_t batch, std::size_t steps,
                                Rng* rng) const {
  const std::size_t d = config_.d_model;
  std::size_t idx = 0;
  Var hcur = linear(t, x, p[0], p[1]);
  idx = 2;
  {
    const Matrix pe = positional_encoding(steps, d);
    Matrix tiled(batch * steps, d);
    for (std::size_t b = 0; b < batch; ++b) {
      std::copy_n(pe.data(), steps * d, tiled.row(b * steps).data());
    }
    hcur = add(t, hcur, t.constant(std::move(tiled)));
  }
  for (std::size_t l = 0; l < config_.layers; ++l) {
    const Var w_q = p[idx++], b_q = p[idx++], w_k = p[idx++], w_v = p[idx++],
              b_v = p[idx++], w_o = p[idx++], b_o = p[idx++];
    const Var ln1_g = p[idx++], ln1_b = p[idx++];
    const Var w_ff1 = p[idx++], b_ff1 = p[idx++], w_ff2 = p[idx++],
              b_ff2 = p[idx++];
    const Var ln2_g = p[idx++], ln2_b = p[idx++];

    const Var q = linear(t, hcur, w_q, b_q);
    const Var k = matmul(t, hcur, w_k);
    const Var v = linear(t, hcur, w_v, b_v);
    const Var a = attention(t, q, k, v, batch, steps, config_.heads);
    const Var o = maybe_dropout(t, linear(t, a, w_o, b_o), config_.dropout, rng);
    hcur = layer_norm(t, add(t, hcur, o), ln1_g, ln1_b);

    const Var f1 = gelu(t, linear(t, hcur, w_ff1, b_ff1));
    const Var f2 =
        maybe_dropout(t, linear(t, f1, w_ff2, b_ff2), config_.dropout, rng);
    hcur = layer_norm(t, add(t, hcur, f2), ln2_g, ln2_b);
  }
  return linear(t, hcur, p[idx], p[idx + 1]);
}

Matrix positional_encoding(std::size_t steps, std::size_t d_model) {
  Matrix pe(steps, d_model);
  for (std::size_t pos = 0; pos < steps; ++pos) {
    for (std::size_t i = 0; i < d_model; ++i) {
      const double expo =
          static_cast<double>(2 * (i / 2)) / static_cast<double>(d_model);
      const double angle = static_cast<double>(pos) / std::pow(10000.0, expo);
      pe(pos, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return pe;
}

}  // namespace mad::nn
