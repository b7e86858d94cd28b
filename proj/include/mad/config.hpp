#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "mad/masking.hpp"
#include "mad/nn/model.hpp"
#include "mad/training.hpp"

namespace mad {

// Model hyperparameters; unset fields take the per-kind defaults.
struct ModelOverrides {
  nn::ModelKind kind = nn::ModelKind::lstm;
  std::optional<std::size_t> hidden;
  std::optional<std::size_t> layers;
  std::optional<std::size_t> kernel;
  std::optional<std::size_t> d_model;
  std::optional<std::size_t> ff_dim;
  std::optional<std::size_t> heads;
  std::optional<double> dropout;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::size_t window_len = 21;
  std::size_t train_stride = 1;
  std::size_t test_stride = 1;
  double train_fraction = 0.8;
  std::optional<std::string> label_column;
  ModelOverrides model;
  TrainConfig train;

  // Initial weights are seeded from `seed` via the "init" purpose.
  nn::ModelConfig model_config(std::size_t input_dim) const;
  // `train` with its seed set to `seed`.
  TrainConfig train_config() const;

  void validate() const;
  nlohmann::json to_json() const;
  // FNV-1a of the canonical JSON dump, as 16 hex digits.
  std::string digest() const;
};

// Unknown keys are usage errors.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace mad
