#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mad/masking.hpp"
#include "mad/matrix.hpp"
#include "mad/nn/autodiff.hpp"
#include "mad/rng.hpp"

namespace mad::nn {

enum class ModelKind : std::uint8_t { lstm = 1, tcn = 2, attn_enc = 3 };
enum class Task : std::uint8_t { mad = 1, nsp = 2 };

std::string to_string(ModelKind kind);
std::string to_string(Task task);
ModelKind parse_model_kind(const std::string& name);
Task parse_task(const std::string& name);

struct ModelConfig {
  ModelKind kind = ModelKind::lstm;
  std::size_t input_dim = 6;
  // LSTM hidden size or TCN channel count.
  std::size_t hidden = 50;
  std::size_t layers = 2;
  std::size_t kernel = 7;
  std::size_t d_model = 32;
  std::size_t ff_dim = 128;
  std::size_t heads = 4;
  double dropout = 0.0;
  std::uint64_t init_seed = 0;

  // Desk-scale defaults per kind: LSTM 2x50; TCN 2x50, kernel 7, dropout 0.2;
  // attention encoder d_model 32, ff 128, 4 heads, 2 layers, dropout 0.1.
  static ModelConfig defaults(ModelKind kind, std::size_t input_dim);

  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// A batch of sequences stored as (batch * steps) x channels.
struct SequenceBatch {
  std::size_t batch = 0;
  std::size_t steps = 0;
  Matrix data;

  std::size_t channels() const noexcept { return data.cols(); }
};

// Maps a batch x steps x n input to a batch x steps x n output; output step i
// estimates input step i. The LSTM and TCN are causal, the attention encoder
// sees the whole window.
class SequenceModel {
 public:
  explicit SequenceModel(const ModelConfig& config);

  const ModelConfig& config() const noexcept { return config_; }
  ModelKind kind() const noexcept { return config_.kind; }

  std::span<Parameter> parameters() noexcept { return params_; }
  std::span<const Parameter> parameters() const noexcept { return params_; }
  std::size_t parameter_count() const;
  void zero_grad();

  bool train_mode() const noexcept { return train_mode_; }
  void set_train_mode(bool on) noexcept { train_mode_ = on; }

  // Task the weights were trained for, and the masking policy used (MAD).
  const std::optional<Task>& task() const noexcept { return task_; }
  void set_task(Task task) noexcept { task_ = task; }
  const MaskPolicy& mask_policy() const noexcept { return mask_policy_; }
  void set_mask_policy(const MaskPolicy& policy) { mask_policy_ = policy; }

  // Records the forward graph on `tape`. `dropout_rng` is required when
  // train_mode is on and the model has dropout.
  Var forward(Tape& tape, Var input, std::size_t batch, std::size_t steps,
              Rng* dropout_rng = nullptr);

  // Convenience inference without gradient recording.
  SequenceBatch forward(const SequenceBatch& input,
                        Rng* dropout_rng = nullptr) const;

  // Restores parameter values by name; shapes must agree.
  void load_parameters(const std::vector<Parameter>& params);

 private:
  Var forward_lstm(Tape& t, std::span<const Var> p, Var x, std::size_t batch,
                   std::size_t steps, Rng* rng) const;
  Var forward_tcn(Tape& t, std::span<const Var> p, Var x, std::size_t batch,
                  std::size_t steps, Rng* rng) const;
  Var forward_attn(Tape& t, std::span<const Var> p, Var x, std::size_t batch,
                   std::size_t steps, Rng* rng) const;
  Var forward_impl(Tape& tape, std::span<const Var> p, Var input,
                   std::size_t batch, std::size_t steps, Rng* rng) const;

  void add_param(std::string name, std::size_t rows, std::size_t cols,
                 double bound, Rng& rng);
  void add_constant_param(std::string name, std::size_t cols, double value);

  ModelConfig config_;
  std::vector<Parameter> params_;
  bool train_mode_ = false;
  std::optional<Task> task_;
  MaskPolicy mask_policy_;
};

// Sinusoidal positional encoding, steps x d_model.
Matrix positional_encoding(std::size_t steps, std::size_t d_model);

}  // namespace mad::nn
