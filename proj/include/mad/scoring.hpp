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

enum class ScoreMode { mad, fast_mad, nsp };

std::string to_string(ScoreMode mode);
// Accepts "mad", "fast-mad", "fast_mad" and "nsp".
ScoreMode parse_score_mode(const std::string& name);

struct ScoreRecord {
  WindowOrigin origin;
  int label = 0;
  ScoreMode mode = ScoreMode::mad;
  double score = 0.0;
  double elapsed_seconds = 0.0;
};

// (1/n) sum_j (xhat^j - x^j)^2
double step_distance(std::span<const double> x, std::span<const double> xhat);

// Maps a (batch * steps) x n input to an output of the same shape.
using Predictor =
    std::function<Matrix(const Matrix& input, std::size_t batch, std::size_t steps)>;

Predictor make_predictor(const nn::SequenceModel& model);

struct ScoringOptions {
  std::uint64_t seed = 0;
  // Fill rates for inference masks; defaults to the model's training policy.
  std::optional<FillRates> fill;
  // Windows per forward pass.
  std::size_t chunk_size = 256;
};

struct ScoreRun {
  std::vector<ScoreRecord> records;
  // Predictor invocations; per chunk this is T+1 for mad and 1 otherwise.
  std::size_t forward_passes = 0;
};

// Seed of the inference mask for step `step` of the window at `origin`.
std::uint64_t inference_mask_seed(std::uint64_t seed, const WindowOrigin& origin,
                                  std::size_t step);

// For every window: d(x_i, xhat_i) with only step i masked, in one forward
// pass over the batch.
std::vector<double> masked_step_distances(const Predictor& predict,
                                          std::span<const Window> windows,
                                          std::size_t step,
                                          const FillRates& fill,
                                          std::uint64_t seed);

// Scores are independent of batch composition and order.
ScoreRun score_windows(const Predictor& predict, std::span<const Window> windows,
                       ScoreMode mode, const FillRates& fill,
                       const ScoringOptions& options);

// Checks that the model was trained for the task the mode needs.
ScoreRun score_windows(const nn::SequenceModel& model,
                       std::span<const Window> windows, ScoreMode mode,
                       const ScoringOptions& options);

// Total deviation sum_{i=0..T} d(x_i, xhat_i) with T+1 forward passes.
ScoreRecord score_mad(const nn::SequenceModel& model, const Window& w,
                      const ScoringOptions& options);
// Only the last step masked; equals the i = T term of score_mad.
ScoreRecord score_fast_mad(const nn::SequenceModel& model, const Window& w,
                           const ScoringOptions& options);
// Steps 0..T-1 in, distance of the last output to step T.
ScoreRecord score_nsp(const nn::SequenceModel& model, const Window& w);

struct Threshold {
  double value = 0.0;
  double target_far = 0.05;
  std::size_t calibration_size = 0;
};

// Smallest calibration score s with #{scores > s} <= floor(target_far * N).
Threshold calibrate_threshold(std::span<const double> noc_scores,
                              double target_far);

// series_id,start_index,label,mode,score,elapsed_seconds. Elapsed time is
// written as 0 unless include_timing is set.
std::string scores_to_csv(std::span<const ScoreRecord> records,
                          bool include_timing);
std::vector<ScoreRecord> scores_from_csv(const std::string& text);

}  // namespace mad
