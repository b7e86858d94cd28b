#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mad/data.hpp"
#include "mad/masking.hpp"
#include "mad/nn/model.hpp"

namespace mad {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::uint64_t t = 0;
};

// One bias-corrected Adam update from the gradients held in `params`.
// A non-finite gradient aborts before anything is modified.
void adam_step(std::span<nn::Parameter> params, AdamState& state,
               const AdamConfig& cfg);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  std::optional<double> val_loss;
  double seconds = 0.0;
};

struct TrainConfig {
  nn::Task task = nn::Task::mad;
  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  AdamConfig adam;
  std::uint64_t seed = 0;
  MaskPolicy mask;
  std::optional<std::size_t> patience;
  // Global gradient-norm clip; 0 disables it.
  double clip_norm = 0.0;
  // Invoked after every completed epoch.
  std::function<void(const EpochRecord&)> on_epoch;

  void validate() const;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;

  // epoch,train_loss,val_loss,seconds
  std::string to_csv() const;
};

// Seed of the training mask of window `window` in epoch `epoch`.
std::uint64_t train_mask_seed(std::uint64_t seed, std::size_t epoch,
                              std::size_t window);

// Dynamic masking: every window gets a fresh mask each epoch, seeded by
// train_mask_seed. Validation uses one fixed mask per window.
TrainHistory train_mad(nn::SequenceModel& model, std::span<const Window> train,
                       std::span<const Window> val, const TrainConfig& cfg);

// Inputs are steps 0..T-1 of each window, the target is step T, read from the
// model output at the last input step.
TrainHistory train_nsp(nn::SequenceModel& model, std::span<const Window> train,
                       std::span<const Window> val, const TrainConfig& cfg);

TrainHistory train(nn::SequenceModel& model, std::span<const Window> train,
                   std::span<const Window> val, const TrainConfig& cfg);

double validation_loss(const nn::SequenceModel& model,
                       std::span<const Window> windows, const TrainConfig& cfg);

}  // namespace mad
