#include <cmath>
#include <set>

#include "doctest.h"
#include "mad/nn/checkpoint.hpp"
#include "mad/synth.hpp"
#include "mad/training.hpp"
#include "support.hpp"

using namespace mad;

namespace {

nn::Parameter scalar_param(double v) {
  nn::Parameter p{"theta", Matrix(1, 1, v), {}};
  p.zero_grad();
  return p;
}

// Textbook bias-corrected Adam on one scalar.
struct ReferenceAdam {
  double lr, b1, b2, eps;
  double m = 0.0, v = 0.0;
  int t = 0;
  double step(double theta, double g) {
    ++t;
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    const double mhat = m / (1.0 - std::pow(b1, t));
    const double vhat = v / (1.0 - std::pow(b2, t));
    return theta - lr * mhat / (std::sqrt(vhat) + eps);
  }
};

std::vector<Window> synth_windows(std::size_t rows, std::size_t stride,
                                  std::uint64_t seed) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.train_rows = rows;
  cfg.test_rows = 100;
  cfg.segment_count = 1;
  const auto d = synth_generate(cfg);
  const auto norm = Normalizer::fit(d.train);
  return make_windows(norm.apply(d.train), 21, stride);
}

nn::SequenceModel small_model(nn::ModelKind kind, std::uint64_t seed) {
  auto cfg = nn::ModelConfig::defaults(kind, 6);
  cfg.hidden = 8;
  cfg.d_model = 8;
  cfg.ff_dim = 16;
  cfg.heads = 2;
  cfg.init_seed = seed;
  return nn::SequenceModel(cfg);
}

TrainConfig quick_config(nn::Task task, std::size_t epochs) {
  TrainConfig cfg;
  cfg.task = task;
  cfg.epochs = epochs;
  cfg.batch_size = 16;
  cfg.seed = 3;
  return cfg;
}

std::vector<Matrix> snapshot(const nn::SequenceModel& m) {
  std::vector<Matrix> out;
  for (const auto& p : m.parameters()) out.push_back(p.value);
  return out;
}

}  // namespace

TEST_SUITE("training") {

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  std::vector<nn::Parameter> ps{scalar_param(0.4)};
  AdamState st;
  adam_step(ps, st, {});
  CHECK(ps[0].value(0, 0) == 0.4);
  CHECK(st.t == 1);
}

TEST_CASE("adam: first unit-gradient step moves by the learning rate") {
  std::vector<nn::Parameter> ps{scalar_param(0.0)};
  ps[0].grad(0, 0) = 1.0;
  AdamState st;
  adam_step(ps, st, {});
  CHECK(ps[0].value(0, 0) == doctest::Approx(-0.001 / (1.0 + 1e-8)).epsilon(1e-15));
}

TEST_CASE("adam: quadratic trajectory matches a reference implementation") {
  const AdamConfig cfg{0.05, 0.9, 0.999, 1e-8};
  ReferenceAdam ref{cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon};
  std::vector<nn::Parameter> ps{scalar_param(0.0)};
  AdamState st;
  double theta = 0.0;
  for (int i = 0; i < 100; ++i) {
    ps[0].grad(0, 0) = 2.0 * (ps[0].value(0, 0) - 3.0);
    adam_step(ps, st, cfg);
    theta = ref.step(theta, 2.0 * (theta - 3.0));
    REQUIRE(std::abs(ps[0].value(0, 0) - theta) <= 1e-12);
  }
  CHECK(theta > 1.0);
}

TEST_CASE("adam: the first step direction is invariant to gradient scale") {
  for (double g : {-2.5, 0.3}) {
    for (double c : {1e-3, 1.0, 1e3}) {
      std::vector<nn::Parameter> ps{scalar_param(1.0)};
      ps[0].grad(0, 0) = c * g;
      AdamState st;
      adam_step(ps, st, {0.01, 0.9, 0.999, 1e-12});
      const double delta = ps[0].value(0, 0) - 1.0;
      CHECK(std::signbit(delta) != std::signbit(g));
      CHECK(std::abs(delta) == doctest::Approx(0.01).epsilon(1e-6));
    }
  }
}

TEST_CASE("adam: a non-finite gradient aborts before any update") {
  std::vector<nn::Parameter> ps{scalar_param(1.0), scalar_param(2.0)};
  ps[0].grad(0, 0) = 1.0;
  ps[1].grad(0, 0) = std::nan("");
  AdamState st;
  CHECK(test::error_kind_of([&] { adam_step(ps, st, {}); }) == ErrorKind::numerical);
  CHECK(ps[0].value(0, 0) == 1.0);
  CHECK(ps[1].value(0, 0) == 2.0);
  CHECK(st.t == 0);
}

TEST_CASE("zero learning rate leaves every parameter bitwise unchanged") {
  const auto ws = synth_windows(120, 3, 1);
  for (nn::Task task : {nn::Task::mad, nn::Task::nsp}) {
    auto model = small_model(nn::ModelKind::tcn, 2);
    const auto before = snapshot(model);
    auto cfg = quick_config(task, 3);
    cfg.adam.learning_rate = 0.0;
    const auto h = train(model, ws, {}, cfg);
    CHECK(h.epochs.size() == 3);
    CHECK(snapshot(model) == before);
  }
}

TEST_CASE("training is deterministic for every kind and task") {
  const auto ws = synth_windows(150, 4, 2);
  const auto [tr, va] = split_train_val(ws, 0.8, 1);
  for (auto kind : {nn::ModelKind::lstm, nn::ModelKind::tcn, nn::ModelKind::attn_enc}) {
    for (nn::Task task : {nn::Task::mad, nn::Task::nsp}) {
      auto a = small_model(kind, 5);
      auto b = small_model(kind, 5);
      const auto cfg = quick_config(task, 2);
      const auto ha = train(a, tr, va, cfg);
      const auto hb = train(b, tr, va, cfg);
      REQUIRE(ha.epochs.size() == hb.epochs.size());
      for (std::size_t e = 0; e < ha.epochs.size(); ++e) {
        CHECK(ha.epochs[e].train_loss == hb.epochs[e].train_loss);
        CHECK(ha.epochs[e].val_loss == hb.epochs[e].val_loss);
      }
      CHECK(nn::encode_checkpoint(a) == nn::encode_checkpoint(b));
      CHECK(a.task() == task);
      CHECK_FALSE(a.train_mode());
    }
  }
}

TEST_CASE("masks are redrawn across epochs") {
  std::set<std::set<std::size_t>> distinct;
  const MaskPolicy policy;
  for (std::size_t epoch = 0; epoch < 100; ++epoch) {
    std::set<std::size_t> steps;
    for (const auto& e : sample_mask(21, 6, policy, train_mask_seed(9, epoch, 0)).entries) {
      steps.insert(e.step);
    }
    distinct.insert(steps);
  }
  CHECK(distinct.size() >= 2);
  CHECK(train_mask_seed(9, 0, 0) != train_mask_seed(9, 0, 1));
}

TEST_CASE("nsp training drives the loss to zero on a constant series") {
  Window w;
  w.x = Matrix(21, 6);
  for (std::size_t c = 0; c < 6; ++c) {
    for (std::size_t r = 0; r < 21; ++r) w.x(r, c) = 0.1 + 0.15 * static_cast<double>(c);
  }
  const std::vector<Window> ws(32, w);
  auto model = small_model(nn::ModelKind::lstm, 8);
  auto cfg = quick_config(nn::Task::nsp, 200);
  cfg.adam.learning_rate = 0.01;
  const auto h = train_nsp(model, ws, {}, cfg);
  CHECK(h.epochs.back().train_loss < 1e-5);
  CHECK(h.epochs.back().train_loss < h.epochs.front().train_loss * 1e-2);
}

TEST_CASE("late training loss is below early training loss on NOC data") {
  const auto ws = synth_windows(600, 2, 6);
  for (nn::Task task : {nn::Task::mad, nn::Task::nsp}) {
    auto model = small_model(nn::ModelKind::tcn, 9);
    const auto h = train(model, ws, {}, quick_config(task, 20));
    double early = 0.0, late = 0.0;
    for (std::size_t e = 0; e < 2; ++e) {
      early += h.epochs[e].train_loss;
      late += h.epochs[h.epochs.size() - 1 - e].train_loss;
    }
    CHECK(late < early);
  }
}

TEST_CASE("early stopping halts once validation stops improving") {
  const auto ws = synth_windows(150, 4, 2);
  const auto [tr, va] = split_train_val(ws, 0.8, 1);
  auto model = small_model(nn::ModelKind::lstm, 3);
  auto cfg = quick_config(nn::Task::mad, 50);
  cfg.adam.learning_rate = 0.0;
  cfg.patience = 2;
  std::size_t callbacks = 0;
  cfg.on_epoch = [&](const EpochRecord&) { ++callbacks; };
  const auto h = train(model, tr, va, cfg);
  CHECK(h.epochs.size() == 3);
  CHECK(callbacks == 3);
  CHECK(h.epochs[0].val_loss == h.epochs[2].val_loss);
}

TEST_CASE("history csv has one row per epoch") {
  TrainHistory h;
  h.epochs.push_back({0, 0.5, 0.25, 1.0});
  h.epochs.push_back({1, 0.125, std::nullopt, 2.0});
  const std::string csv = h.to_csv();
  CHECK(csv.rfind("epoch,train_loss,val_loss,seconds\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.find("0,0.5,0.25,") != std::string::npos);
}

TEST_CASE("training rejects bad configurations and inputs") {
  const auto ws = synth_windows(120, 5, 1);
  auto model = small_model(nn::ModelKind::lstm, 1);
  CHECK(test::error_kind_of([&] {
          train_mad(model, ws, {}, quick_config(nn::Task::nsp, 1));
        }) == ErrorKind::usage);
  CHECK(test::error_kind_of([&] {
          train_nsp(model, ws, {}, quick_config(nn::Task::mad, 1));
        }) == ErrorKind::usage);
  CHECK(test::error_kind_of([&] {
          train(model, {}, {}, quick_config(nn::Task::mad, 1));
        }) == ErrorKind::data);
  auto cfg = quick_config(nn::Task::mad, 1);
  cfg.patience = 3;
  CHECK(test::error_kind_of([&] { train(model, ws, {}, cfg); }) == ErrorKind::usage);
  cfg = quick_config(nn::Task::mad, 0);
  CHECK(test::error_kind_of([&] { cfg.validate(); }) == ErrorKind::usage);
  cfg = quick_config(nn::Task::mad, 1);
  cfg.adam.beta1 = 1.0;
  CHECK(test::error_kind_of([&] { cfg.validate(); }) == ErrorKind::usage);
  cfg = quick_config(nn::Task::mad, 1);
  cfg.mask.fill = {0.5, 0.0, 0.0};
  CHECK(test::error_kind_of([&] { cfg.validate(); }) == ErrorKind::usage);

  auto other = nn::ModelConfig::defaults(nn::ModelKind::lstm, 3);
  nn::SequenceModel wrong(other);
  CHECK(test::error_kind_of([&] {
          train(wrong, ws, {}, quick_config(nn::Task::mad, 1));
        }) == ErrorKind::data);
}

}

TEST_SUITE("overfit") {

// With a causal model and random fill, a masked step 0 leaves the output
// at step 0 blind to the window, so the expected loss has a floor of about
// (3/21) * (1/3) * Var(x_0) across windows.
TEST_CASE("mad training overfits a ten-window set") {
  auto ws = synth_windows(200, 1, 4);
  ws.resize(10);
  nn::SequenceModel model(
      [] {
        auto c = nn::ModelConfig::defaults(nn::ModelKind::lstm, 6);
        c.init_seed = 7;
        return c;
      }());
  auto cfg = quick_config(nn::Task::mad, 500);
  cfg.batch_size = 64;
  const auto h = train_mad(model, ws, {}, cfg);
  REQUIRE(h.epochs.size() == 500);
  CHECK(h.epochs.back().train_loss < 1e-3);
}

}
