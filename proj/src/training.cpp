#include "mad/training.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mad/error.hpp"
#include "mad/io.hpp"
#include "mad/nn/loss.hpp"
#include "mad/rng.hpp"

namespace mad {

void adam_step(std::span<nn::Parameter> params, AdamState& state,
               const AdamConfig& cfg) {
  for (const auto& p : params) {
    if (!p.grad.same_shape(p.value)) {
      throw usage_error("adam_step: gradient shape mismatch for '" + p.name + "'");
    }
    for (double g : p.grad.values()) {
      if (!std::isfinite(g)) {
        throw numerical_error("adam_step: non-finite gradient in '" + p.name +
                              "' at step " + std::to_string(state.t + 1));
      }
    }
  }
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.value.rows(), p.value.cols());
      state.v.emplace_back(p.value.rows(), p.value.cols());
    }
  }
  if (state.m.size() != params.size()) {
    throw usage_error("adam_step: optimizer state does not match parameters");
  }
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto theta = params[k].value.values();
    const auto g = params[k].grad.values();
    auto m = state.m[k].values();
    auto v = state.v[k].values();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      theta[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

void TrainConfig::validate() const {
  if (epochs < 1) throw usage_error("epochs must be >= 1");
  if (batch_size < 1) throw usage_error("batch_size must be >= 1");
  if (!(adam.learning_rate >= 0.0) || !std::isfinite(adam.learning_rate)) {
    throw usage_error("learning_rate must be finite and >= 0");
  }
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) ||
      !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw usage_error("Adam betas must lie in [0, 1)");
  }
  if (!(adam.epsilon > 0.0)) throw usage_error("Adam epsilon must be > 0");
  if (clip_norm < 0.0) throw usage_error("clip_norm must be >= 0");
  if (patience && *patience == 0) throw usage_error("patience must be >= 1");
  if (task == nn::Task::mad) mask.validate();
}

std::string TrainHistory::to_csv() const {
  std::ostringstream out;
  out << "epoch,train_loss,val_loss,seconds\n";
  for (const auto& e : epochs) {
    out << e.epoch << ',' << format_double(e.train_loss) << ','
        << (e.val_loss ? format_double(*e.val_loss) : std::string()) << ','
        << format_double(e.seconds) << '\n';
  }
  return out.str();
}

namespace {

struct PreparedBatch {
  nn::SequenceBatch input;
  Matrix target;
  std::vector<MaskSpec> specs;
};

void check_windows(const nn::SequenceModel& model,
                   std::span<const Window> windows, std::size_t& steps) {
  for (const auto& w : windows) {
    if (w.channels() != model.config().input_dim) {
      throw data_error("window has " + std::to_string(w.channels()) +
                       " channels, model expects " +
                       std::to_string(model.config().input_dim));
    }
    if (steps == 0) steps = w.length();
    if (w.length() != steps) throw data_error("windows differ in length");
  }
}

template <typename SeedFn>
PreparedBatch prepare_mad(std::span<const Window> windows,
                          std::span<const std::size_t> idx,
                          const MaskPolicy& policy, SeedFn seed_of) {
  const std::size_t steps = windows[idx[0]].length();
  const std::size_t n = windows[idx[0]].channels();
  PreparedBatch b;
  b.input = {idx.size(), steps, Matrix(idx.size() * steps, n)};
  b.target = Matrix(idx.size() * steps, n);
  b.specs.reserve(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const Window& w = windows[idx[k]];
    std::copy_n(w.x.data(), steps * n, b.target.row(k * steps).data());
    std::copy_n(w.x.data(), steps * n, b.input.data.row(k * steps).data());
    b.specs.push_back(sample_mask(steps, n, policy, seed_of(idx[k])));
    apply_mask_in_place(b.input.data, k * steps, b.specs.back());
  }
  return b;
}

PreparedBatch prepare_nsp(std::span<const Window> windows,
                          std::span<const std::size_t> idx) {
  const std::size_t steps = windows[idx[0]].length() - 1;
  const std::size_t n = windows[idx[0]].channels();
  PreparedBatch b;
  b.input = {idx.size(), steps, Matrix(idx.size() * steps, n)};
  b.target = Matrix(idx.size(), n);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const Window& w = windows[idx[k]];
    std::copy_n(w.x.data(), steps * n, b.input.data.row(k * steps).data());
    std::copy_n(w.x.row(steps).data(), n, b.target.row(k).data());
  }
  return b;
}

nn::Var batch_loss(nn::Tape& tape, nn::SequenceModel& model,
                   const PreparedBatch& b, nn::Task task, Rng* dropout_rng) {
  const nn::Var x = tape.constant(b.input.data);
  const nn::Var y = model.forward(tape, x, b.input.batch, b.input.steps, dropout_rng);
  if (task == nn::Task::mad) return nn::loss_masked(tape, y, b.target, b.specs);
  const nn::Var last =
      nn::take_step(tape, y, b.input.batch, b.input.steps, b.input.steps - 1);
  return nn::loss_nsp(tape, last, b.target);
}

void clip_gradients(std::span<nn::Parameter> params, double max_norm) {
  double sq = 0.0;
  for (const auto& p : params) {
    for (double g : p.grad.values()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (norm <= max_norm || norm == 0.0) return;
  const double s = max_norm / norm;
  for (auto& p : params) {
    for (auto& g : p.grad.values()) g *= s;
  }
}

double evaluate_loss(const nn::SequenceModel& model,
                     std::span<const Window> windows, const TrainConfig& cfg) {
  constexpr std::size_t kChunk = 256;
  double total = 0.0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < windows.size(); start += kChunk) {
    const std::size_t end = std::min(windows.size(), start + kChunk);
    idx.resize(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const PreparedBatch b =
        cfg.task == nn::Task::mad
            ? prepare_mad(windows, idx, cfg.mask,
                          [&](std::size_t i) {
                            return derive_seed(cfg.seed, "val_mask", {i});
                          })
            : prepare_nsp(windows, idx);
    const nn::SequenceBatch out = model.forward(b.input);
    nn::Tape tape(false);
    const nn::Var y = tape.constant(out.data);
    const nn::Var loss =
        cfg.task == nn::Task::mad
            ? nn::loss_masked(tape, y, b.target, b.specs)
            : nn::loss_nsp(tape,
                           nn::take_step(tape, y, out.batch, out.steps,
                                         out.steps - 1),
                           b.target);
    const double value = tape.value(loss)(0, 0);
    total += value * static_cast<double>(idx.size());
  }
  return total / static_cast<double>(windows.size());
}

TrainHistory run_training(nn::SequenceModel& model,
                          std::span<const Window> train,
                          std::span<const Window> val, const TrainConfig& cfg) {
  cfg.validate();
  if (train.empty()) throw data_error("training set is empty");
  std::size_t steps = 0;
  check_windows(model, train, steps);
  check_windows(model, val, steps);
  if (steps < 2) throw data_error("windows need at least 2 steps");
  if (cfg.patience && val.empty()) {
    throw usage_error("early stopping needs a validation set");
  }

  model.set_task(cfg.task);
  if (cfg.task == nn::Task::mad) model.set_mask_policy(cfg.mask);

  AdamState adam;
  TrainHistory history;
  std::vector<std::size_t> order(train.size());
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    model.set_train_mode(true);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle(derive_seed(cfg.seed, "shuffle", {epoch}));
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      std::swap(order[i], order[uniform_index(shuffle, i + 1)]);
    }
    Rng dropout_rng(derive_seed(cfg.seed, "dropout", {epoch}));

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const PreparedBatch b =
          cfg.task == nn::Task::mad
              ? prepare_mad(train, idx, cfg.mask,
                            [&](std::size_t i) {
                              return train_mask_seed(cfg.seed, epoch, i);
                            })
              : prepare_nsp(train, idx);
      model.zero_grad();
      nn::Tape tape(true);
      const nn::Var loss = batch_loss(tape, model, b, cfg.task, &dropout_rng);
      const double value = tape.value(loss)(0, 0);
      if (!std::isfinite(value)) {
        throw numerical_error("non-finite training loss at epoch " +
                              std::to_string(epoch));
      }
      tape.backward(loss);
      if (cfg.clip_norm > 0.0) clip_gradients(model.parameters(), cfg.clip_norm);
      adam_step(model.parameters(), adam, cfg.adam);
      epoch_loss += value * static_cast<double>(idx.size());
    }
    model.set_train_mode(false);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / static_cast<double>(train.size());
    if (!val.empty()) {
      rec.val_loss = evaluate_loss(model, val, cfg);
      if (!std::isfinite(*rec.val_loss)) {
        throw numerical_error("non-finite validation loss at epoch " +
                              std::to_string(epoch));
      }
    }
    rec.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    history.epochs.push_back(rec);
    if (cfg.on_epoch) cfg.on_epoch(rec);

    if (cfg.patience) {
      if (*rec.val_loss < best_val) {
        best_val = *rec.val_loss;
        since_best = 0;
      } else if (++since_best >= *cfg.patience) {
        break;
      }
    }
  }
  model.zero_grad();
  return history;
}

}  // namespace

std::uint64_t train_mask_seed(std::uint64_t seed, std::size_t epoch,
                              std::size_t window) {
  return derive_seed(seed, "train_mask", {epoch, window});
}

TrainHistory train_mad(nn::SequenceModel& model, std::span<const Window> train,
                       std::span<const Window> val, const TrainConfig& cfg) {
  if (cfg.task != nn::Task::mad) throw usage_error("train_mad needs task = mad");
  return run_training(model, train, val, cfg);
}

TrainHistory train_nsp(nn::SequenceModel& model, std::span<const Window> train,
                       std::span<const Window> val, const TrainConfig& cfg) {
  if (cfg.task != nn::Task::nsp) throw usage_error("train_nsp needs task = nsp");
  return run_training(model, train, val, cfg);
}

TrainHistory train(nn::SequenceModel& model, std::span<const Window> train,
                   std::span<const Window> val, const TrainConfig& cfg) {
  return run_training(model, train, val, cfg);
}

double validation_loss(const nn::SequenceModel& model,
                       std::span<const Window> windows, const TrainConfig& cfg) {
  if (windows.empty()) throw data_error("validation set is empty");
  return evaluate_loss(model, windows, cfg);
}

}  // namespace mad
