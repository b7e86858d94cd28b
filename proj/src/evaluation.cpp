#include "mad/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mad/error.hpp"
#include "mad/io.hpp"

namespace mad {

namespace {

void check_aligned(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw usage_error("scores and labels differ in length");
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw numerical_error("non-finite score");
    if (labels[i] != 0 && labels[i] != 1) throw data_error("label outside {0,1}");
  }
}

std::size_t count_positive(std::span<const int> labels) {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

// Indices ordered by score descending, index ascending.
std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  return order;
}

}  // namespace

AlarmCounts fdr_far(std::span<const double> scores, std::span<const int> labels,
                    double threshold) {
  check_aligned(scores, labels);
  AlarmCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool alarm = scores[i] > threshold;
    if (labels[i] == 1) {
      ++c.positives;
      c.alarms_positive += alarm ? 1 : 0;
    } else {
      ++c.negatives;
      c.alarms_negative += alarm ? 1 : 0;
    }
  }
  if (c.positives > 0) {
    c.fdr = static_cast<double>(c.alarms_positive) / static_cast<double>(c.positives);
  }
  if (c.negatives > 0) {
    c.far = static_cast<double>(c.alarms_negative) / static_cast<double>(c.negatives);
  }
  return c;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  check_aligned(scores, labels);
  const std::size_t p = count_positive(labels);
  const std::size_t n = labels.size() - p;
  if (p == 0 || n == 0) throw data_error("roc_auc needs both classes");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Twice the Mann-Whitney U, kept integral.
  std::uint64_t twice_u = 0;
  std::uint64_t negatives_below = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t pos = 0, neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? pos : neg) += 1;
      ++j;
    }
    twice_u += 2 * pos * negatives_below + pos * neg;
    negatives_below += neg;
    i = j;
  }
  return static_cast<double>(twice_u) /
         (2.0 * static_cast<double>(p) * static_cast<double>(n));
}

double average_precision(std::span<const double> scores,
                         std::span<const int> labels) {
  check_aligned(scores, labels);
  const std::size_t p = count_positive(labels);
  if (p == 0) throw data_error("average_precision needs a positive");
  const auto order = descending_order(scores);
  double ap = 0.0;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (labels[order[k]] != 1) continue;
    ++tp;
    ap += (static_cast<double>(tp) / static_cast<double>(k + 1)) /
          static_cast<double>(p);
  }
  return ap;
}

namespace {

template <typename F>
std::vector<CurvePoint> sweep(std::span<const double> scores,
                              std::span<const int> labels, F point) {
  check_aligned(scores, labels);
  const std::size_t p = count_positive(labels);
  const std::size_t n = labels.size() - p;
  const auto order = descending_order(scores);
  std::vector<CurvePoint> out;
  std::size_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    (labels[order[k]] == 1 ? tp : fp) += 1;
    if (k + 1 < order.size() && scores[order[k + 1]] == scores[order[k]]) continue;
    out.push_back(point(scores[order[k]], tp, fp, p, n));
  }
  return out;
}

}  // namespace

std::vector<CurvePoint> roc_curve(std::span<const double> scores,
                                  std::span<const int> labels) {
  return sweep(scores, labels,
               [](double s, std::size_t tp, std::size_t fp, std::size_t p,
                  std::size_t n) {
                 return CurvePoint{
                     s, n ? static_cast<double>(fp) / static_cast<double>(n) : 0.0,
                     p ? static_cast<double>(tp) / static_cast<double>(p) : 0.0};
               });
}

std::vector<CurvePoint> pr_curve(std::span<const double> scores,
                                 std::span<const int> labels) {
  return sweep(scores, labels,
               [](double s, std::size_t tp, std::size_t fp, std::size_t p,
                  std::size_t) {
                 return CurvePoint{
                     s, p ? static_cast<double>(tp) / static_cast<double>(p) : 0.0,
                     static_cast<double>(tp) / static_cast<double>(tp + fp)};
               });
}

std::string curve_to_csv(std::span<const CurvePoint> points, const char* x_name,
                         const char* y_name) {
  std::ostringstream out;
  out << "threshold," << x_name << ',' << y_name << '\n';
  for (const auto& pt : points) {
    out << format_double(pt.threshold) << ',' << format_double(pt.x) << ','
        << format_double(pt.y) << '\n';
  }
  return out.str();
}

std::map<ScoreMode, double> timing_summary(std::span<const ScoreRecord> records) {
  if (records.empty()) throw data_error("timing summary of an empty group");
  std::map<ScoreMode, std::pair<double, std::size_t>> acc;
  for (const auto& r : records) {
    auto& [sum, count] = acc[r.mode];
    sum += r.elapsed_seconds;
    ++count;
  }
  std::map<ScoreMode, double> out;
  for (const auto& [mode, sc] : acc) {
    out[mode] = sc.first / static_cast<double>(sc.second);
  }
  return out;
}

std::vector<double> scores_of(std::span<const ScoreRecord> records) {
  std::vector<double> s(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) s[i] = records[i].score;
  return s;
}

std::vector<int> labels_of(std::span<const ScoreRecord> records) {
  std::vector<int> l(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) l[i] = records[i].label;
  return l;
}

EvalReport evaluate(std::span<const ScoreRecord> records,
                    const Threshold& threshold) {
  if (records.empty()) throw data_error("no score records to evaluate");
  EvalReport report;
  std::vector<std::string> modes;
  for (const auto& r : records) {
    const auto m = to_string(r.mode);
    if (std::find(modes.begin(), modes.end(), m) == modes.end()) modes.push_back(m);
  }
  if (modes.size() != 1) throw data_error("score records mix several modes");
  report.mode = modes.front();
  report.threshold = threshold;
  const auto scores = scores_of(records);
  const auto labels = labels_of(records);
  report.counts = fdr_far(scores, labels, threshold.value);
  if (report.counts.positives > 0 && report.counts.negatives > 0) {
    report.roc_auc = roc_auc(scores, labels);
  }
  if (report.counts.positives > 0) {
    report.average_precision = average_precision(scores, labels);
  }
  report.mean_elapsed_seconds = timing_summary(records);
  return report;
}

nlohmann::json EvalReport::to_json() const {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::json j;
  j["mode"] = mode;
  j["threshold"] = {{"value", threshold.value},
                    {"target_far", threshold.target_far},
                    {"calibration_size", threshold.calibration_size}};
  j["fdr"] = opt(counts.fdr);
  j["far"] = opt(counts.far);
  j["roc_auc"] = opt(roc_auc);
  j["average_precision"] = opt(average_precision);
  j["counts"] = {{"positives", counts.positives},
                 {"negatives", counts.negatives},
                 {"alarms_positive", counts.alarms_positive},
                 {"alarms_negative", counts.alarms_negative}};
  nlohmann::json timing = nlohmann::json::object();
  for (const auto& [m, t] : mean_elapsed_seconds) timing[to_string(m)] = t;
  j["mean_elapsed_seconds"] = timing;
  j["metadata"] = metadata;
  return j;
}

std::vector<MaskPolicy> standard_ablation_grid(double mask_rate) {
  auto policy = [mask_rate](double rnd, double same, double zero, bool step) {
    return MaskPolicy{mask_rate, FillRates{rnd, same, zero}, step};
  };
  return {policy(1.0, 0.0, 0.0, true),  policy(0.1, 0.1, 0.8, true),
          policy(0.0, 0.0, 1.0, true),  policy(0.2, 0.0, 0.8, true),
          policy(0.0, 0.2, 0.8, true),  policy(0.8, 0.2, 0.0, true),
          policy(1.0, 0.0, 0.0, false)};
}

std::vector<AblationRow> ablation_run(const AblationSetup& setup,
                                      std::span<const Window> train,
                                      std::span<const Window> val,
                                      std::span<const Window> test,
                                      std::span<const MaskPolicy> grid) {
  if (grid.empty()) throw usage_error("ablation grid is empty");
  for (const auto& p : grid) p.validate();
  std::vector<AblationRow> rows;
  for (const auto& policy : grid) {
    nn::SequenceModel model(setup.model);
    TrainConfig cfg = setup.train;
    cfg.task = nn::Task::mad;
    cfg.mask = policy;
    const auto history = mad::train(model, train, val, cfg);
    ScoringOptions opts;
    opts.seed = setup.score_seed;
    const auto run = score_windows(model, test, ScoreMode::mad, opts);
    const auto scores = scores_of(run.records);
    const auto labels = labels_of(run.records);
    AblationRow row;
    row.policy = policy;
    row.roc_auc = roc_auc(scores, labels);
    row.average_precision = average_precision(scores, labels);
    row.final_train_loss =
        history.epochs.empty() ? 0.0 : history.epochs.back().train_loss;
    rows.push_back(row);
  }
  return rows;
}

std::string ablation_to_csv(std::span<const AblationRow> rows) {
  std::ostringstream out;
  out << "p_rnd,p_same,p_zero,step_mode,mask_rate,roc_auc,average_precision,"
         "final_train_loss\n";
  for (const auto& r : rows) {
    out << format_double(r.policy.fill.p_rnd) << ','
        << format_double(r.policy.fill.p_same) << ','
        << format_double(r.policy.fill.p_zero) << ','
        << (r.policy.step_mode ? "step" : "cell") << ','
        << format_double(r.policy.mask_rate) << ',' << format_double(r.roc_auc)
        << ',' << format_double(r.average_precision) << ','
        << format_double(r.final_train_loss) << '\n';
  }
  return out.str();
}

}  // namespace mad
