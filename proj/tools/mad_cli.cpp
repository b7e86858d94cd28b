#include <malloc.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/cfg/env.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "mad/config.hpp"
#include "mad/data.hpp"
#include "mad/error.hpp"
#include "mad/evaluation.hpp"
#include "mad/io.hpp"
#include "mad/nn/checkpoint.hpp"
#include "mad/nn/gradcheck.hpp"
#include "mad/rng.hpp"
#include "mad/scoring.hpp"
#include "mad/synth.hpp"
#include "mad/training.hpp"

namespace fs = std::filesystem;
using namespace mad;

namespace {

// Flag values that override the config file when given.
struct RunFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> window_len, train_stride, test_stride;
  std::optional<double> train_fraction;
  std::optional<std::string> label_column;
  std::optional<std::string> model_kind;
  std::optional<std::size_t> hidden, layers, kernel, d_model, ff_dim, heads;
  std::optional<double> dropout;
  std::optional<std::string> task;
  std::optional<std::size_t> epochs, batch_size, patience;
  std::optional<double> learning_rate, clip_norm;
  std::optional<double> mask_rate;
  std::vector<double> fill_rates;
  bool cell_mode = false;
};

void add_data_flags(CLI::App& app, RunFlags& f) {
  app.add_option("--config", f.config_path, "Run configuration file (JSON)")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", f.seed, "Run seed; every derived seed flows from it");
  app.add_option("--window-len", f.window_len, "Window length T+1");
  app.add_option("--label-column", f.label_column,
                 "Name of the 0/1 label column (default: 'label' if present)");
}

void add_train_flags(CLI::App& app, RunFlags& f) {
  app.add_option("--train-stride", f.train_stride, "Stride between training windows");
  app.add_option("--train-fraction", f.train_fraction,
                 "Fraction of training windows used for fitting; the rest validate");
  app.add_option("--model", f.model_kind, "Base model: lstm | tcn | attn_enc");
  app.add_option("--hidden", f.hidden, "LSTM hidden size or TCN channel count");
  app.add_option("--layers", f.layers, "Number of layers or blocks");
  app.add_option("--kernel", f.kernel, "TCN kernel size");
  app.add_option("--d-model", f.d_model, "Attention encoder model width");
  app.add_option("--ff-dim", f.ff_dim, "Attention encoder feed-forward width");
  app.add_option("--heads", f.heads, "Attention heads");
  app.add_option("--dropout", f.dropout, "Dropout rate during training");
  app.add_option("--epochs", f.epochs, "Training epochs");
  app.add_option("--batch-size", f.batch_size, "Windows per optimizer step");
  app.add_option("--lr", f.learning_rate, "Adam learning rate");
  app.add_option("--patience", f.patience,
                 "Stop after this many epochs without validation improvement");
  app.add_option("--clip-norm", f.clip_norm, "Global gradient-norm clip; 0 disables");
  app.add_option("--mask-rate", f.mask_rate, "Fraction of steps or cells masked");
  app.add_option("--fill-rates", f.fill_rates, "p_rnd p_same p_zero")
      ->expected(3)
      ->delimiter(',');
  app.add_flag("--cell-mode", f.cell_mode,
               "Mask individual (step, channel) cells instead of whole steps");
}

RunConfig resolve_config(const RunFlags& f) {
  RunConfig c = f.config_path.empty() ? RunConfig{} : load_run_config(f.config_path);
  if (f.seed) c.seed = *f.seed;
  if (f.window_len) c.window_len = *f.window_len;
  if (f.train_stride) c.train_stride = *f.train_stride;
  if (f.test_stride) c.test_stride = *f.test_stride;
  if (f.train_fraction) c.train_fraction = *f.train_fraction;
  if (f.label_column) c.label_column = *f.label_column;
  if (f.model_kind) c.model.kind = nn::parse_model_kind(*f.model_kind);
  if (f.hidden) c.model.hidden = f.hidden;
  if (f.layers) c.model.layers = f.layers;
  if (f.kernel) c.model.kernel = f.kernel;
  if (f.d_model) c.model.d_model = f.d_model;
  if (f.ff_dim) c.model.ff_dim = f.ff_dim;
  if (f.heads) c.model.heads = f.heads;
  if (f.dropout) c.model.dropout = f.dropout;
  if (f.task) c.train.task = nn::parse_task(*f.task);
  if (f.epochs) c.train.epochs = *f.epochs;
  if (f.batch_size) c.train.batch_size = *f.batch_size;
  if (f.patience) c.train.patience = f.patience;
  if (f.learning_rate) c.train.adam.learning_rate = *f.learning_rate;
  if (f.clip_norm) c.train.clip_norm = *f.clip_norm;
  if (f.mask_rate) c.train.mask.mask_rate = *f.mask_rate;
  if (!f.fill_rates.empty()) {
    c.train.mask.fill = FillRates{f.fill_rates[0], f.fill_rates[1], f.fill_rates[2]};
  }
  if (f.cell_mode) c.train.mask.step_mode = false;
  c.validate();
  return c;
}

CsvOptions csv_options(const RunConfig& c) {
  CsvOptions o;
  o.label_column = c.label_column;
  return o;
}

std::vector<SeriesTable> load_tables(const std::vector<std::string>& paths,
                                     const RunConfig& c) {
  std::vector<SeriesTable> tables;
  for (const auto& p : paths) tables.push_back(load_csv(p, csv_options(c)));
  for (const auto& t : tables) {
    if (t.channels() != tables.front().channels()) {
      throw data_error("input files differ in channel count");
    }
  }
  return tables;
}

// Concatenates rows so the normalizer sees every training row.
SeriesTable stack_rows(const std::vector<SeriesTable>& tables) {
  std::size_t rows = 0;
  for (const auto& t : tables) rows += t.rows();
  SeriesTable out;
  out.values = Matrix(rows, tables.front().channels());
  out.channel_names = tables.front().channel_names;
  std::size_t r = 0;
  for (const auto& t : tables) {
    std::copy_n(t.values.data(), t.values.size(), out.values.row(r).data());
    r += t.rows();
  }
  return out;
}

std::vector<Window> windows_of(const std::vector<SeriesTable>& tables,
                               const Normalizer& norm, std::size_t window_len,
                               std::size_t stride) {
  std::vector<Window> out;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    auto w = make_windows(norm.apply(tables[i]), window_len, stride, i);
    std::move(w.begin(), w.end(), std::back_inserter(out));
  }
  return out;
}

// Training consumes NOC windows only.
std::vector<Window> drop_anomalous(std::vector<Window> windows) {
  const auto before = windows.size();
  std::erase_if(windows, [](const Window& w) { return w.label != 0; });
  if (windows.size() != before) {
    spdlog::warn("dropped {} labelled-anomalous training windows",
                 before - windows.size());
  }
  if (windows.empty()) throw data_error("no NOC training windows");
  return windows;
}

fs::path normalizer_path_for(const fs::path& checkpoint) {
  return checkpoint.parent_path() / "normalizer.csv";
}

void log_epoch(const EpochRecord& r) {
  if (r.val_loss) {
    spdlog::info("epoch {} train_loss {:.6g} val_loss {:.6g} ({:.2f}s)", r.epoch,
                 r.train_loss, *r.val_loss, r.seconds);
  } else {
    spdlog::info("epoch {} train_loss {:.6g} ({:.2f}s)", r.epoch, r.train_loss,
                 r.seconds);
  }
}

// ---------------------------------------------------------------- synth

struct SynthFlags {
  std::string out_dir;
  SynthConfig cfg;
  std::size_t noc_rows = 4000;
  std::vector<std::string> kinds;
};

int cmd_synth(const SynthFlags& f) {
  SynthConfig cfg = f.cfg;
  if (!f.kinds.empty()) {
    cfg.kinds.clear();
    for (const auto& k : f.kinds) cfg.kinds.push_back(parse_anomaly_kind(k));
  }
  cfg.validate();
  const auto data = synth_generate(cfg);
  const fs::path dir(f.out_dir);
  write_csv(data.train, dir / "train.csv");
  write_csv(data.test, dir / "test.csv");
  if (f.noc_rows > 0) {
    const SyntheticProcess process(cfg);
    auto noc = process.sample(f.noc_rows, cfg.train_rows + cfg.test_rows, 2);
    noc.labels = std::vector<int>(noc.rows(), 0);
    write_csv(noc, dir / "noc.csv");
  }
  spdlog::info("wrote synthetic series to {} ({} anomaly segments)", dir.string(),
               data.segments.size());
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainFlags {
  RunFlags run;
  std::vector<std::string> train_csv;
  std::string out_dir;
};

int cmd_train(const TrainFlags& f) {
  const RunConfig c = resolve_config(f.run);
  const auto tables = load_tables(f.train_csv, c);
  const Normalizer norm = Normalizer::fit(stack_rows(tables));
  auto windows = drop_anomalous(windows_of(tables, norm, c.window_len, c.train_stride));
  auto [train, val] = split_train_val(std::move(windows), c.train_fraction,
                                      derive_seed(c.seed, "split", {}));
  nn::SequenceModel model(c.model_config(norm.channels()));
  spdlog::info("training {} ({} parameters) for {} on {} windows, {} validation",
               nn::to_string(model.kind()), model.parameter_count(),
               nn::to_string(c.train.task), train.size(), val.size());
  TrainConfig tc = c.train_config();
  tc.on_epoch = log_epoch;
  const auto history = mad::train(model, train, val, tc);
  const fs::path dir(f.out_dir);
  nn::save_checkpoint(model, dir / "model.ckpt");
  write_file_atomic(dir / "normalizer.csv", norm.to_csv());
  write_file_atomic(dir / "history.csv", history.to_csv());
  write_file_atomic(dir / "config.json", c.to_json().dump(2) + "\n");
  spdlog::info("wrote checkpoint to {}", (dir / "model.ckpt").string());
  return 0;
}

// ---------------------------------------------------------------- score

struct ScoreFlags {
  RunFlags run;
  std::string checkpoint;
  std::string normalizer;
  std::vector<std::string> data;
  std::string mode;
  std::string out;
  bool record_timing = false;
  std::size_t chunk_size = 256;
};

int cmd_score(const ScoreFlags& f) {
  const RunConfig c = resolve_config(f.run);
  const ScoreMode mode = parse_score_mode(f.mode);
  const auto model = nn::load_checkpoint(f.checkpoint);
  const fs::path norm_path =
      f.normalizer.empty() ? normalizer_path_for(f.checkpoint) : fs::path(f.normalizer);
  const auto norm = Normalizer::from_csv(read_file(norm_path));
  const auto tables = load_tables(f.data, c);
  const auto windows = windows_of(tables, norm, c.window_len, c.test_stride);
  ScoringOptions opts;
  opts.seed = c.seed;
  opts.chunk_size = f.chunk_size;
  const auto run = score_windows(model, windows, mode, opts);
  write_file_atomic(f.out, scores_to_csv(run.records, f.record_timing));
  spdlog::info("scored {} windows in {} mode with {} forward passes",
               run.records.size(), to_string(mode), run.forward_passes);
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalFlags {
  std::string scores;
  std::string calib;
  double far = 0.05;
  std::string out;
  std::string roc_csv;
  std::string pr_csv;
};

int cmd_eval(const EvalFlags& f) {
  const auto records = scores_from_csv(read_file(f.scores));
  if (records.empty()) throw data_error("no score records in " + f.scores);
  std::vector<double> noc;
  if (!f.calib.empty()) {
    const auto calib = scores_from_csv(read_file(f.calib));
    if (!calib.empty() && calib.front().mode != records.front().mode) {
      throw usage_error("calibration scores come from a different mode");
    }
    for (const auto& r : calib) {
      if (r.label == 0) noc.push_back(r.score);
    }
  } else {
    spdlog::warn("no --calib scores; calibrating on the normal windows of {}",
                 f.scores);
    for (const auto& r : records) {
      if (r.label == 0) noc.push_back(r.score);
    }
  }
  const Threshold threshold = calibrate_threshold(noc, f.far);
  EvalReport report = evaluate(records, threshold);
  report.metadata["scores_file"] = fs::path(f.scores).filename().string();
  report.metadata["scores_digest"] = fnv1a64(read_file(f.scores));
  if (!f.calib.empty()) {
    report.metadata["calibration_file"] = fs::path(f.calib).filename().string();
    report.metadata["calibration_digest"] = fnv1a64(read_file(f.calib));
  }
  write_file_atomic(f.out, report.to_json().dump(2) + "\n");
  const auto scores = scores_of(records);
  const auto labels = labels_of(records);
  if (!f.roc_csv.empty()) {
    write_file_atomic(f.roc_csv, curve_to_csv(roc_curve(scores, labels), "fpr", "tpr"));
  }
  if (!f.pr_csv.empty()) {
    write_file_atomic(f.pr_csv,
                      curve_to_csv(pr_curve(scores, labels), "recall", "precision"));
  }
  spdlog::info("threshold {:.6g}: fdr {} far {}", threshold.value,
               report.counts.fdr ? format_double(*report.counts.fdr) : "n/a",
               report.counts.far ? format_double(*report.counts.far) : "n/a");
  return 0;
}

// ---------------------------------------------------------------- ablate

struct AblateFlags {
  RunFlags run;
  std::vector<std::string> train_csv;
  std::vector<std::string> test_csv;
  std::string out;
};

int cmd_ablate(const AblateFlags& f) {
  const RunConfig c = resolve_config(f.run);
  const auto train_tables = load_tables(f.train_csv, c);
  const Normalizer norm = Normalizer::fit(stack_rows(train_tables));
  auto windows =
      drop_anomalous(windows_of(train_tables, norm, c.window_len, c.train_stride));
  auto [train, val] = split_train_val(std::move(windows), c.train_fraction,
                                      derive_seed(c.seed, "split", {}));
  const auto test_tables = load_tables(f.test_csv, c);
  if (test_tables.front().channels() != norm.channels()) {
    throw data_error("test and training files differ in channel count");
  }
  const auto test = windows_of(test_tables, norm, c.window_len, c.test_stride);
  AblationSetup setup;
  setup.model = c.model_config(norm.channels());
  setup.train = c.train_config();
  setup.score_seed = c.seed;
  const auto grid = standard_ablation_grid(c.train.mask.mask_rate);
  std::vector<AblationRow> rows;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    spdlog::info("ablation policy {}/{}", i + 1, grid.size());
    const auto row = ablation_run(setup, train, val, test, std::span(&grid[i], 1));
    rows.push_back(row.front());
  }
  write_file_atomic(f.out, ablation_to_csv(rows));
  return 0;
}

// ---------------------------------------------------------------- gradcheck

struct GradCheckFlags {
  RunFlags run;
  std::size_t channels = 6;
  std::size_t batch = 2;
  double eps = 1e-5;
};

int cmd_gradcheck(const GradCheckFlags& f) {
  const RunConfig c = resolve_config(f.run);
  nn::ModelConfig mc = c.model_config(f.channels);
  mc.dropout = 0.0;
  nn::SequenceModel model(mc);
  Rng rng(derive_seed(c.seed, "gradcheck", {}));
  nn::SequenceBatch probe{f.batch, c.window_len, Matrix(f.batch * c.window_len, f.channels)};
  Matrix target(probe.data.rows(), probe.data.cols());
  for (auto& v : probe.data.values()) v = uniform01(rng);
  for (auto& v : target.values()) v = uniform01(rng);
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = nn::grad_check(model, probe, target, f.eps);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("model=%s parameters=%zu max_rel_error=%.3e worst=%s[%zu] analytic=%.6e numeric=%.6e seconds=%.2f\n",
              nn::to_string(mc.kind).c_str(), r.checked, r.max_rel_error,
              r.worst_parameter.c_str(), r.worst_index, r.worst_analytic, r.worst_numeric, secs);
  if (r.max_rel_error >= 1e-4) {
    throw numerical_error("gradient check failed: max relative error " +
                          format_double(r.max_rel_error));
  }
  return 0;
}

// ---------------------------------------------------------------- bench

struct BenchFlags {
  RunFlags run;
  std::string mad_checkpoint;
  std::string nsp_checkpoint;
  std::vector<std::string> data;
  std::size_t repeats = 5;
  std::size_t chunk_size = 256;
  std::string out;
};

int cmd_bench(const BenchFlags& f) {
  if (f.mad_checkpoint.empty() && f.nsp_checkpoint.empty()) {
    throw usage_error("bench needs --mad-checkpoint and/or --nsp-checkpoint");
  }
  if (f.repeats == 0) throw usage_error("--repeats must be >= 1");
  const RunConfig c = resolve_config(f.run);
  std::vector<std::pair<std::string, std::vector<ScoreMode>>> jobs;
  if (!f.mad_checkpoint.empty()) {
    jobs.push_back({f.mad_checkpoint, {ScoreMode::mad, ScoreMode::fast_mad}});
  }
  if (!f.nsp_checkpoint.empty()) jobs.push_back({f.nsp_checkpoint, {ScoreMode::nsp}});
  std::vector<ScoreRecord> all;
  std::map<ScoreMode, std::size_t> passes;
  std::size_t windows_per_run = 0;
  for (const auto& [path, modes] : jobs) {
    const auto model = nn::load_checkpoint(path);
    const auto norm = Normalizer::from_csv(read_file(normalizer_path_for(path)));
    const auto windows =
        windows_of(load_tables(f.data, c), norm, c.window_len, c.test_stride);
    windows_per_run = windows.size();
    ScoringOptions opts;
    opts.seed = c.seed;
    opts.chunk_size = f.chunk_size;
    for (const auto mode : modes) {
      for (std::size_t k = 0; k < f.repeats; ++k) {
        auto run = score_windows(model, windows, mode, opts);
        passes[mode] += run.forward_passes;
        all.insert(all.end(), run.records.begin(), run.records.end());
      }
    }
  }
  const auto summary = timing_summary(all);
  std::ostringstream out;
  out << "mode,mean_elapsed_seconds,windows,repeats,forward_passes_per_run\n";
  for (const auto& [mode, mean] : summary) {
    out << to_string(mode) << ',' << format_double(mean) << ',' << windows_per_run
        << ',' << f.repeats << ',' << passes[mode] / f.repeats << '\n';
    spdlog::info("{}: {:.3e} s per window", to_string(mode), mean);
  }
  if (f.out.empty()) {
    std::cout << out.str();
  } else {
    write_file_atomic(f.out, out.str());
  }
  return 0;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

void report_error(const char* kind, const std::string& message) {
  std::fprintf(stderr, "error=%s message=\"%s\"\n", kind, one_line(message).c_str());
}

}  // namespace

int main(int argc, char** argv) {
  // Keep large scratch buffers on the heap instead of fresh mmaps per pass.
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  auto logger = spdlog::stderr_color_mt("mad");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::cfg::load_env_levels();

  CLI::App app{"Masked anomaly detection for multivariate time series"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "mad 1.0");

  SynthFlags synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic NOC/anomaly benchmark");
  s->add_option("--out", synth.out_dir, "Output directory for train.csv/test.csv/noc.csv")
      ->required();
  s->add_option("--seed", synth.cfg.seed, "Generator seed");
  s->add_option("--channels", synth.cfg.channels, "Number of channels");
  s->add_option("--train-rows", synth.cfg.train_rows, "NOC training rows");
  s->add_option("--test-rows", synth.cfg.test_rows, "Test rows");
  s->add_option("--noc-rows", synth.noc_rows,
                "Rows of an extra held-out NOC draw (noc.csv); 0 skips it");
  s->add_option("--segments", synth.cfg.segment_count, "Anomaly segments in the test series");
  s->add_option("--segment-min", synth.cfg.segment_min_len, "Shortest anomaly segment");
  s->add_option("--segment-max", synth.cfg.segment_max_len, "Longest anomaly segment");
  s->add_option("--kinds", synth.kinds, "Anomaly kinds: spike,drift,decouple")
      ->delimiter(',');
  s->add_option("--coupling-density", synth.cfg.coupling_density,
                "Fraction of nonzero cross-channel couplings");
  s->add_option("--noise-std", synth.cfg.noise_std, "Additive noise level");
  s->add_option("--anomaly-scale", synth.cfg.anomaly_scale,
                "Anomaly size in NOC standard deviations");

  TrainFlags train;
  auto* t = app.add_subcommand("train", "Train a base model on NOC data (mad or nsp task)");
  add_data_flags(*t, train.run);
  add_train_flags(*t, train.run);
  t->add_option("--task", train.run.task, "Self-supervised task: mad | nsp");
  t->add_option("--train", train.train_csv, "NOC training CSV (repeatable)")->required();
  t->add_option("--out", train.out_dir,
                "Output directory for model.ckpt, normalizer.csv, history.csv, config.json")
      ->required();

  ScoreFlags score;
  auto* sc = app.add_subcommand("score", "Score test windows with a trained checkpoint");
  add_data_flags(*sc, score.run);
  sc->add_option("--test-stride", score.run.test_stride, "Stride between test windows");
  sc->add_option("--checkpoint", score.checkpoint, "Checkpoint file")
      ->required()
      ->check(CLI::ExistingFile);
  sc->add_option("--normalizer", score.normalizer,
                 "Normalizer CSV (default: normalizer.csv next to the checkpoint)");
  sc->add_option("--data", score.data, "CSV to score (repeatable; one series id each)")
      ->required();
  sc->add_option("--mode", score.mode, "Scoring mode: mad | fast-mad | nsp")->required();
  sc->add_option("--out", score.out, "Output scores.csv")->required();
  sc->add_flag("--record-timing", score.record_timing,
               "Write measured per-window seconds instead of 0");
  sc->add_option("--chunk-size", score.chunk_size, "Windows per forward pass");

  EvalFlags eval;
  auto* e = app.add_subcommand("eval", "Calibrate a threshold and write an evaluation report");
  e->add_option("--scores", eval.scores, "scores.csv to evaluate")
      ->required()
      ->check(CLI::ExistingFile);
  e->add_option("--calib", eval.calib,
                "scores.csv of held-out NOC windows used for calibration "
                "(default: the normal windows of --scores)")
      ->check(CLI::ExistingFile);
  e->add_option("--far", eval.far, "Target false-alarm rate");
  e->add_option("--out", eval.out, "Output report.json")->required();
  e->add_option("--roc-csv", eval.roc_csv, "Optional ROC curve points");
  e->add_option("--pr-csv", eval.pr_csv, "Optional precision-recall curve points");

  AblateFlags ablate;
  auto* a = app.add_subcommand("ablate", "Train and score the seven masking mixtures");
  add_data_flags(*a, ablate.run);
  add_train_flags(*a, ablate.run);
  a->add_option("--test-stride", ablate.run.test_stride, "Stride between test windows");
  a->add_option("--train", ablate.train_csv, "NOC training CSV (repeatable)")->required();
  a->add_option("--test", ablate.test_csv, "Labelled test CSV (repeatable)")->required();
  a->add_option("--out", ablate.out, "Output ablation CSV")->required();

  GradCheckFlags grad;
  auto* g = app.add_subcommand("gradcheck",
                               "Compare analytic gradients with central differences");
  add_data_flags(*g, grad.run);
  add_train_flags(*g, grad.run);
  g->add_option("--channels", grad.channels, "Input channels of the probe");
  g->add_option("--batch", grad.batch, "Probe batch size");
  g->add_option("--eps", grad.eps, "Finite-difference step in [1e-6, 1e-3]");

  BenchFlags bench;
  auto* b = app.add_subcommand("bench", "Measure mean per-window inference time per mode");
  add_data_flags(*b, bench.run);
  b->add_option("--test-stride", bench.run.test_stride, "Stride between test windows");
  b->add_option("--mad-checkpoint", bench.mad_checkpoint,
                "MAD-trained checkpoint (times mad and fast_mad)")
      ->check(CLI::ExistingFile);
  b->add_option("--nsp-checkpoint", bench.nsp_checkpoint,
                "NSP-trained checkpoint (times nsp)")
      ->check(CLI::ExistingFile);
  b->add_option("--data", bench.data, "CSV to score (repeatable)")->required();
  b->add_option("--repeats", bench.repeats, "Passes over the data per mode");
  b->add_option("--chunk-size", bench.chunk_size, "Windows per forward pass");
  b->add_option("--out", bench.out, "Output timing CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    std::cout << app.version() << '\n';
    return 0;
  } catch (const CLI::ParseError& ex) {
    report_error(to_string(ErrorKind::usage), ex.what());
    return exit_code(ErrorKind::usage);
  }

  try {
    if (*s) return cmd_synth(synth);
    if (*t) return cmd_train(train);
    if (*sc) return cmd_score(score);
    if (*e) return cmd_eval(eval);
    if (*a) return cmd_ablate(ablate);
    if (*g) return cmd_gradcheck(grad);
    if (*b) return cmd_bench(bench);
  } catch (const Error& ex) {
    report_error(to_string(ex.kind()), ex.what());
    return exit_code(ex.kind());
  } catch (const std::exception& ex) {
    report_error(to_string(ErrorKind::data), ex.what());
    return exit_code(ErrorKind::data);
  }
  return 0;
}
