#include "mad/scoring.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <sstream>

#include "mad/error.hpp"
#include "mad/io.hpp"
#include "mad/rng.hpp"

namespace mad {

std::string to_string(ScoreMode mode) {
  switch (mode) {
    case ScoreMode::mad:
      return "mad";
    case ScoreMode::fast_mad:
      return "fast_mad";
    case ScoreMode::nsp:
      return "nsp";
  }
  return "unknown";
}

ScoreMode parse_score_mode(const std::string& name) {
  if (name == "mad") return ScoreMode::mad;
  if (name == "fast-mad" || name == "fast_mad") return ScoreMode::fast_mad;
  if (name == "nsp") return ScoreMode::nsp;
  throw usage_error("unknown scoring mode '" + name + "'");
}

double step_distance(std::span<const double> x, std::span<const double> xhat) {
  if (x.size() != xhat.size() || x.empty()) {
    throw usage_error("step_distance: arity mismatch");
  }
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = xhat[j] - x[j];
    s += d * d;
  }
  return s / static_cast<double>(x.size());
}

Predictor make_predictor(const nn::SequenceModel& model) {
  return [&model](const Matrix& input, std::size_t batch, std::size_t steps) {
    return model.forward(nn::SequenceBatch{batch, steps, input}).data;
  };
}

std::uint64_t inference_mask_seed(std::uint64_t seed, const WindowOrigin& origin,
                                  std::size_t step) {
  return derive_seed(seed, "score_mask", {origin.series_id, origin.start, step});
}

namespace {

void check_uniform(std::span<const Window> windows) {
  if (windows.empty()) return;
  const std::size_t steps = windows[0].length(), n = windows[0].channels();
  for (const auto& w : windows) {
    if (w.length() != steps || w.channels() != n) {
      throw data_error("scoring: windows differ in shape");
    }
  }
  if (steps < 2) throw data_error("scoring: windows need at least 2 steps");
}

std::vector<double> nsp_distances(const Predictor& predict,
                                  std::span<const Window> windows) {
  const std::size_t steps = windows[0].length() - 1;
  const std::size_t n = windows[0].channels();
  Matrix input(windows.size() * steps, n);
  for (std::size_t k = 0; k < windows.size(); ++k) {
    std::copy_n(windows[k].x.data(), steps * n, input.row(k * steps).data());
  }
  const Matrix out = predict(input, windows.size(), steps);
  std::vector<double> d(windows.size());
  for (std::size_t k = 0; k < windows.size(); ++k) {
    d[k] = step_distance(windows[k].x.row(steps), out.row(k * steps + steps - 1));
  }
  return d;
}

}  // namespace

std::vector<double> masked_step_distances(const Predictor& predict,
                                          std::span<const Window> windows,
                                          std::size_t step,
                                          const FillRates& fill,
                                          std::uint64_t seed) {
  if (windows.empty()) return {};
  check_uniform(windows);
  const std::size_t steps = windows[0].length();
  const std::size_t n = windows[0].channels();
  if (step >= steps) throw usage_error("masked step outside the window");
  Matrix input(windows.size() * steps, n);
  for (std::size_t k = 0; k < windows.size(); ++k) {
    std::copy_n(windows[k].x.data(), steps * n, input.row(k * steps).data());
    const MaskSpec spec = single_step_mask(
        steps, n, step, fill, inference_mask_seed(seed, windows[k].origin, step));
    apply_mask_in_place(input, k * steps, spec);
  }
  const Matrix out = predict(input, windows.size(), steps);
  if (out.rows() != input.rows() || out.cols() != n) {
    throw usage_error("predictor returned a mis-shaped output");
  }
  std::vector<double> d(windows.size());
  for (std::size_t k = 0; k < windows.size(); ++k) {
    d[k] = step_distance(windows[k].x.row(step), out.row(k * steps + step));
  }
  return d;
}

ScoreRun score_windows(const Predictor& predict, std::span<const Window> windows,
                       ScoreMode mode, const FillRates& fill,
                       const ScoringOptions& options) {
  check_uniform(windows);
  if (options.chunk_size == 0) throw usage_error("chunk_size must be positive");
  ScoreRun run;
  run.records.reserve(windows.size());
  for (std::size_t start = 0; start < windows.size(); start += options.chunk_size) {
    const std::size_t end = std::min(windows.size(), start + options.chunk_size);
    const auto chunk = windows.subspan(start, end - start);
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<double> scores;
    switch (mode) {
      case ScoreMode::mad: {
        const std::size_t steps = chunk[0].length();
        scores.assign(chunk.size(), 0.0);
        for (std::size_t i = 0; i < steps; ++i) {
          const auto d = masked_step_distances(predict, chunk, i, fill, options.seed);
          ++run.forward_passes;
          for (std::size_t k = 0; k < chunk.size(); ++k) scores[k] += d[k];
        }
        break;
      }
      case ScoreMode::fast_mad:
        scores = masked_step_distances(predict, chunk, chunk[0].length() - 1,
                                       fill, options.seed);
        ++run.forward_passes;
        break;
      case ScoreMode::nsp:
        scores = nsp_distances(predict, chunk);
        ++run.forward_passes;
        break;
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count() /
        static_cast<double>(chunk.size());
    for (std::size_t k = 0; k < chunk.size(); ++k) {
      run.records.push_back(
          ScoreRecord{chunk[k].origin, chunk[k].label, mode, scores[k], elapsed});
    }
  }
  return run;
}

ScoreRun score_windows(const nn::SequenceModel& model,
                       std::span<const Window> windows, ScoreMode mode,
                       const ScoringOptions& options) {
  if (!model.task()) throw usage_error("model has not been trained");
  const nn::Task needed = mode == ScoreMode::nsp ? nn::Task::nsp : nn::Task::mad;
  if (*model.task() != needed) {
    throw usage_error("task mismatch: model was trained for " +
                      nn::to_string(*model.task()) + ", mode " + to_string(mode) +
                      " needs " + nn::to_string(needed));
  }
  if (model.train_mode()) throw usage_error("scoring needs inference mode");
  for (const auto& w : windows) {
    if (w.channels() != model.config().input_dim) {
      throw data_error("window arity " + std::to_string(w.channels()) +
                       " does not match model input " +
                       std::to_string(model.config().input_dim));
    }
  }
  const FillRates fill = options.fill.value_or(model.mask_policy().fill);
  return score_windows(make_predictor(model), windows, mode, fill, options);
}

ScoreRecord score_mad(const nn::SequenceModel& model, const Window& w,
                      const ScoringOptions& options) {
  return score_windows(model, std::span(&w, 1), ScoreMode::mad, options).records[0];
}

ScoreRecord score_fast_mad(const nn::SequenceModel& model, const Window& w,
                           const ScoringOptions& options) {
  return score_windows(model, std::span(&w, 1), ScoreMode::fast_mad, options)
      .records[0];
}

ScoreRecord score_nsp(const nn::SequenceModel& model, const Window& w) {
  return score_windows(model, std::span(&w, 1), ScoreMode::nsp, {}).records[0];
}

Threshold calibrate_threshold(std::span<const double> noc_scores,
                              double target_far) {
  if (noc_scores.empty()) throw data_error("calibration needs NOC scores");
  if (!(target_far > 0.0 && target_far < 1.0)) {
    throw usage_error("target FAR must lie in (0, 1)");
  }
  std::vector<double> sorted(noc_scores.begin(), noc_scores.end());
  for (double s : sorted) {
    if (!std::isfinite(s)) throw numerical_error("non-finite calibration score");
  }
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const auto allowed = static_cast<std::size_t>(
      std::floor(target_far * static_cast<double>(n) + 1e-9));
  // Exceedance count is non-increasing along the sorted scores; take the
  // first candidate that admits at most `allowed` alarms.
  double value = sorted.back();
  for (std::size_t k = 0; k < n; ++k) {
    const auto above = static_cast<std::size_t>(
        sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), sorted[k]));
    if (above <= allowed) {
      value = sorted[k];
      break;
    }
  }
  return Threshold{value, target_far, n};
}

std::string scores_to_csv(std::span<const ScoreRecord> records,
                          bool include_timing) {
  std::ostringstream out;
  out << "series_id,start_index,label,mode,score,elapsed_seconds\n";
  for (const auto& r : records) {
    out << r.origin.series_id << ',' << r.origin.start << ',' << r.label << ','
        << to_string(r.mode) << ',' << format_double(r.score) << ','
        << format_double(include_timing ? r.elapsed_seconds : 0.0) << '\n';
  }
  return out.str();
}

std::vector<ScoreRecord> scores_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "series_id,start_index,label,mode,score,elapsed_seconds") {
    throw data_error("scores file: unexpected header '" + line + "'");
  }
  std::vector<ScoreRecord> records;
  std::size_t line_no = 1;
  auto parse_u = [&](const std::string& s) {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
      throw data_error("scores file: bad integer at line " + std::to_string(line_no));
    }
    return v;
  };
  // Non-finite scores parse; evaluation rejects them as numerical failures.
  auto parse_d = [&](const std::string& s, bool finite) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || (finite && !std::isfinite(v))) {
      throw data_error("scores file: bad number at line " + std::to_string(line_no));
    }
    return v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    if (f.size() != 6) {
      throw data_error("scores file: expected 6 fields at line " +
                       std::to_string(line_no));
    }
    ScoreRecord r;
    r.origin = {parse_u(f[0]), parse_u(f[1])};
    const auto label = parse_u(f[2]);
    if (label > 1) throw data_error("scores file: label outside {0,1}");
    r.label = static_cast<int>(label);
    r.mode = parse_score_mode(f[3]);
    r.score = parse_d(f[4], false);
    r.elapsed_seconds = parse_d(f[5], true);
    records.push_back(r);
  }
  return records;
}

}  // namespace mad
