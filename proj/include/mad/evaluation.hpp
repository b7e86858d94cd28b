#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mad/data.hpp"
#include "mad/masking.hpp"
#include "mad/nn/model.hpp"
#include "mad/scoring.hpp"
#include "mad/training.hpp"

namespace mad {

struct AlarmCounts {
  // Absent when there are no labelled-anomalous windows.
  std::optional<double> fdr;
  // Absent when there are no labelled-normal windows.
  std::optional<double> far;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t alarms_positive = 0;
  std::size_t alarms_negative = 0;
};

// Alarm iff score > threshold.
AlarmCounts fdr_far(std::span<const double> scores, std::span<const int> labels,
                    double threshold);

// Mann-Whitney statistic with ties counted 1/2. Needs both classes.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

// Step-wise sum of (R_k - R_{k-1}) P_k over a stable (score desc, index asc)
// ordering. Needs at least one positive.
double average_precision(std::span<const double> scores,
                         std::span<const int> labels);

struct CurvePoint {
  double threshold = 0.0;
  double x = 0.0;
  double y = 0.0;
};

// One point per distinct score, alarms at score >= threshold; x = FPR, y = TPR.
std::vector<CurvePoint> roc_curve(std::span<const double> scores,
                                  std::span<const int> labels);
// x = recall, y = precision.
std::vector<CurvePoint> pr_curve(std::span<const double> scores,
                                 std::span<const int> labels);
std::string curve_to_csv(std::span<const CurvePoint> points, const char* x_name,
                         const char* y_name);

// Mean elapsed seconds per mode present in `records`.
std::map<ScoreMode, double> timing_summary(std::span<const ScoreRecord> records);

struct EvalReport {
  std::string mode;
  Threshold threshold;
  AlarmCounts counts;
  std::optional<double> roc_auc;
  std::optional<double> average_precision;
  std::map<ScoreMode, double> mean_elapsed_seconds;
  nlohmann::json metadata = nlohmann::json::object();

  nlohmann::json to_json() const;
};

EvalReport evaluate(std::span<const ScoreRecord> records,
                    const Threshold& threshold);

std::vector<double> scores_of(std::span<const ScoreRecord> records);
std::vector<int> labels_of(std::span<const ScoreRecord> records);

// The seven mixtures of the masking ablation, in table order.
std::vector<MaskPolicy> standard_ablation_grid(double mask_rate = 0.15);

struct AblationRow {
  MaskPolicy policy;
  double roc_auc = 0.0;
  double average_precision = 0.0;
  double final_train_loss = 0.0;
};

struct AblationSetup {
  nn::ModelConfig model;
  TrainConfig train;
  std::uint64_t score_seed = 0;
};

// One model per policy from the same initial weights, data and seeds, each
// scored in mad mode on `test`.
std::vector<AblationRow> ablation_run(const AblationSetup& setup,
                                      std::span<const Window> train,
                                      std::span<const Window> val,
                                      std::span<const Window> test,
                                      std::span<const MaskPolicy> grid);

// p_rnd,p_same,p_zero,step_mode,mask_rate,roc_auc,average_precision,final_train_loss
std::string ablation_to_csv(std::span<const AblationRow> rows);

}  // namespace mad
