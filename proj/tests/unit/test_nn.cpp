#include <cmath>
#include <set>

#include "doctest.h"
#include "mad/nn/autodiff.hpp"
#include "mad/nn/checkpoint.hpp"
#include "mad/nn/gradcheck.hpp"
#include "mad/nn/loss.hpp"
#include "mad/nn/model.hpp"
#include "mad/io.hpp"
#include "support.hpp"

using namespace mad;
using namespace mad::nn;

namespace {

SequenceModel make_model(ModelKind kind, std::size_t n, std::uint64_t seed,
                         std::size_t width = 0) {
  auto cfg = ModelConfig::defaults(kind, n);
  cfg.init_seed = seed;
  if (width != 0) {
    cfg.hidden = width;
    cfg.d_model = width;
    cfg.ff_dim = 2 * width;
  }
  return SequenceModel(cfg);
}

SequenceBatch random_batch(std::size_t batch, std::size_t steps, std::size_t n,
                           std::uint64_t seed) {
  Rng rng(seed);
  return {batch, steps, test::random_matrix(batch * steps, n, rng)};
}

Parameter random_param(const char* name, std::size_t r, std::size_t c, Rng& rng,
                       double lo = -1.0, double hi = 1.0) {
  Parameter p{name, test::random_matrix(r, c, rng, lo, hi), {}};
  p.zero_grad();
  return p;
}

// Loss sum_ij w_ij (y_ij - t_ij)^2 with random fixed weights and targets.
struct RandomLoss {
  Matrix target;
  Matrix weights;
  RandomLoss(std::size_t r, std::size_t c, std::uint64_t seed) {
    Rng rng(seed);
    target = test::random_matrix(r, c, rng, -1.0, 1.0);
    weights = test::random_matrix(r, c, rng, 0.5, 1.5);
  }
  Var operator()(Tape& t, Var y) const {
    return weighted_sq_error(t, y, target, weights);
  }
};

std::size_t row_of(std::size_t b, std::size_t s, std::size_t steps) {
  return b * steps + s;
}

bool step_equal(const Matrix& a, const Matrix& b, std::size_t row) {
  for (std::size_t c = 0; c < a.cols(); ++c) {
    if (a(row, c) != b(row, c)) return false;
  }
  return true;
}

const ModelKind kKinds[] = {ModelKind::lstm, ModelKind::tcn, ModelKind::attn_enc};

}  // namespace

TEST_SUITE("nn") {

TEST_CASE("forward preserves the batch x steps x n shape") {
  for (ModelKind kind : kKinds) {
    const auto model = make_model(kind, 6, 1);
    const auto out = model.forward(random_batch(4, 21, 6, 2));
    CHECK(out.batch == 4);
    CHECK(out.steps == 21);
    CHECK(out.data.rows() == 84);
    CHECK(out.data.cols() == 6);
  }
}

TEST_CASE("forward rejects a mismatched arity") {
  const auto model = make_model(ModelKind::lstm, 6, 1);
  CHECK(test::error_kind_of([&] { model.forward(random_batch(2, 5, 4, 1)); }) ==
        ErrorKind::usage);
}

TEST_CASE("inference is deterministic and batch-independent") {
  for (ModelKind kind : kKinds) {
    const auto model = make_model(kind, 3, 5);
    CHECK(model.config().dropout >= 0.0);
    const auto in = random_batch(5, 11, 3, 6);
    const auto a = model.forward(in);
    const auto b = model.forward(in);
    CHECK(a.data == b.data);
    for (std::size_t w = 0; w < 5; ++w) {
      SequenceBatch one{1, 11, Matrix(11, 3)};
      for (std::size_t s = 0; s < 11; ++s) {
        for (std::size_t c = 0; c < 3; ++c) one.data(s, c) = in.data(w * 11 + s, c);
      }
      const auto o = model.forward(one);
      for (std::size_t s = 0; s < 11; ++s) {
        for (std::size_t c = 0; c < 3; ++c) {
          REQUIRE(o.data(s, c) == a.data(w * 11 + s, c));
        }
      }
    }
  }
}

TEST_CASE("dropout is active only in train mode") {
  auto model = make_model(ModelKind::tcn, 3, 5);
  REQUIRE(model.config().dropout > 0.0);
  const auto in = random_batch(2, 9, 3, 1);
  const auto eval = model.forward(in);
  model.set_train_mode(true);
  Rng r1(1), r2(2);
  const auto t1 = model.forward(in, &r1);
  const auto t2 = model.forward(in, &r2);
  CHECK_FALSE(t1.data == eval.data);
  CHECK_FALSE(t1.data == t2.data);
  CHECK(test::error_kind_of([&] { model.forward(in); }) == ErrorKind::usage);
}

TEST_CASE("lstm output before the last step ignores the last input") {
  const auto model = make_model(ModelKind::lstm, 6, 3);
  auto in = random_batch(2, 21, 6, 4);
  const auto base = model.forward(in);
  for (std::size_t b = 0; b < 2; ++b) {
    for (std::size_t c = 0; c < 6; ++c) in.data(row_of(b, 20, 21), c) += 0.7;
  }
  const auto moved = model.forward(in);
  for (std::size_t b = 0; b < 2; ++b) {
    for (std::size_t s = 0; s < 20; ++s) {
      CHECK(step_equal(base.data, moved.data, row_of(b, s, 21)));
    }
    CHECK_FALSE(step_equal(base.data, moved.data, row_of(b, 20, 21)));
  }
}

TEST_CASE("causal models are invariant to future perturbations") {
  Rng rng(8);
  for (ModelKind kind : {ModelKind::lstm, ModelKind::tcn}) {
    const auto model = make_model(kind, 4, 9, 8);
    for (int trial = 0; trial < 20; ++trial) {
      auto in = random_batch(1, 15, 4, 100 + trial);
      const auto base = model.forward(in);
      const std::size_t i = uniform_index(rng, 14);
      for (std::size_t s = i + 1; s < 15; ++s) {
        for (std::size_t c = 0; c < 4; ++c) in.data(s, c) = uniform01(rng);
      }
      const auto moved = model.forward(in);
      for (std::size_t s = 0; s <= i; ++s) {
        REQUIRE(step_equal(base.data, moved.data, s));
      }
    }
  }
}

TEST_CASE("attention encoder sees the whole window") {
  const auto model = make_model(ModelKind::attn_enc, 6, 3);
  auto in = random_batch(1, 21, 6, 4);
  const auto base = model.forward(in);
  in.data(20, 0) += 0.5;
  const auto moved = model.forward(in);
  CHECK_FALSE(step_equal(base.data, moved.data, 0));
}

TEST_CASE("tcn receptive field is 19 steps for kernel 7 and two layers") {
  const auto model = make_model(ModelKind::tcn, 3, 12);
  REQUIRE(model.config().kernel == 7);
  REQUIRE(model.config().layers == 2);
  const std::size_t expected_rf = 1 + (7 - 1) * (1 + 2);
  const std::size_t steps = 30;
  const auto in = random_batch(1, steps, 3, 13);
  const auto base = model.forward(in);
  for (std::size_t out = 0; out < steps; ++out) {
    std::set<std::size_t> influencing;
    for (std::size_t p = 0; p < steps; ++p) {
      auto moved = in;
      for (std::size_t c = 0; c < 3; ++c) moved.data(p, c) += 0.3;
      if (!step_equal(base.data, model.forward(moved).data, out)) {
        influencing.insert(p);
      }
    }
    const std::size_t lo = out + 1 >= expected_rf ? out + 1 - expected_rf : 0;
    std::set<std::size_t> oracle;
    for (std::size_t p = lo; p <= out; ++p) oracle.insert(p);
    REQUIRE(influencing == oracle);
  }
}

TEST_CASE("positional encoding uses interleaved sine and cosine") {
  const Matrix pe = positional_encoding(10, 8);
  for (std::size_t pos = 0; pos < 10; ++pos) {
    for (std::size_t i = 0; i < 4; ++i) {
      const double angle = static_cast<double>(pos) /
                           std::pow(10000.0, static_cast<double>(2 * i) / 8.0);
      CHECK(pe(pos, 2 * i) == doctest::Approx(std::sin(angle)).epsilon(1e-12));
      CHECK(pe(pos, 2 * i + 1) == doctest::Approx(std::cos(angle)).epsilon(1e-12));
    }
  }
}

TEST_CASE("scalar model gradient matches the hand derivative") {
  Parameter w{"w", Matrix(1, 1, 1.7), {}};
  w.zero_grad();
  Tape t;
  const double x = -0.6, target = 0.25;
  const Var y = matmul(t, t.constant(Matrix(1, 1, x)), t.param(w));
  const Var loss = weighted_sq_error(t, y, Matrix(1, 1, target), Matrix(1, 1, 1.0));
  CHECK(t.value(loss)(0, 0) ==
        doctest::Approx((1.7 * x - target) * (1.7 * x - target)));
  t.backward(loss);
  CHECK(w.grad(0, 0) == doctest::Approx(2.0 * (1.7 * x - target) * x).epsilon(1e-14));
}

TEST_CASE("loss at an exact fit has zero gradients") {
  for (ModelKind kind : kKinds) {
    auto model = make_model(kind, 3, 2, 8);
    const auto in = random_batch(2, 7, 3, 3);
    const Matrix target = model.forward(in).data;
    model.zero_grad();
    Tape t;
    const Var y = model.forward(t, t.constant(in.data), 2, 7);
    const Var loss =
        weighted_sq_error(t, y, target, Matrix(target.rows(), target.cols(), 1.0));
    CHECK(t.value(loss)(0, 0) == 0.0);
    t.backward(loss);
    for (const auto& p : model.parameters()) {
      for (double g : p.grad.values()) REQUIRE(g == 0.0);
    }
  }
}

TEST_CASE("backward misuse is reported") {
  Tape t;
  CHECK(test::error_kind_of([&] { t.backward(Var{}); }) == ErrorKind::usage);
  Parameter w{"w", Matrix(1, 1, 2.0), {}};
  w.zero_grad();
  const Var y = scale(t, t.param(w), 3.0);
  const Var loss = weighted_sq_error(t, y, Matrix(1, 1), Matrix(1, 1, 1.0));
  t.backward(loss);
  CHECK(w.grad(0, 0) == doctest::Approx(36.0));
  CHECK(test::error_kind_of([&] { t.backward(loss); }) == ErrorKind::usage);
  Tape t2;
  const Var wide = t2.constant(Matrix(1, 2, 1.0));
  CHECK(test::error_kind_of([&] { t2.backward(wide); }) == ErrorKind::usage);
}

TEST_CASE("elementwise and structural ops match finite differences") {
  Rng rng(21);
  auto a = random_param("a", 6, 4, rng);
  auto b = random_param("b", 6, 4, rng);
  auto m = random_param("m", 4, 5, rng);
  auto bias = random_param("bias", 1, 4, rng);

  struct Case {
    const char* name;
    std::function<Var(Tape&, Var, Var, Var, Var)> f;
    std::size_t rows, cols;
  };
  const std::vector<Case> cases = {
      {"matmul", [](Tape& t, Var a, Var, Var m, Var) { return matmul(t, a, m); }, 6, 5},
      {"add", [](Tape& t, Var a, Var b, Var, Var) { return add(t, a, b); }, 6, 4},
      {"add_bias", [](Tape& t, Var a, Var, Var, Var c) { return add_bias(t, a, c); }, 6, 4},
      {"mul", [](Tape& t, Var a, Var b, Var, Var) { return mul(t, a, b); }, 6, 4},
      {"scale", [](Tape& t, Var a, Var, Var, Var) { return scale(t, a, -1.3); }, 6, 4},
      {"sigmoid", [](Tape& t, Var a, Var, Var, Var) { return sigmoid(t, a); }, 6, 4},
      {"tanh", [](Tape& t, Var a, Var, Var, Var) { return nn::tanh(t, a); }, 6, 4},
      {"gelu", [](Tape& t, Var a, Var, Var, Var) { return gelu(t, a); }, 6, 4},
      {"slice_cols", [](Tape& t, Var a, Var, Var, Var) { return slice_cols(t, a, 1, 2); }, 6, 2},
      {"take_step",
       [](Tape& t, Var a, Var, Var, Var) { return take_step(t, a, 2, 3, 1); }, 2, 4},
      {"stack_steps",
       [](Tape& t, Var a, Var b, Var, Var) {
         const Var parts[] = {take_step(t, a, 3, 2, 0), take_step(t, b, 3, 2, 1)};
         return stack_steps(t, parts, 3);
       },
       6, 4},
      {"causal_unfold",
       [](Tape& t, Var a, Var, Var, Var) { return causal_unfold(t, a, 2, 3, 3, 1); }, 6, 12},
      {"causal_unfold_dilated",
       [](Tape& t, Var a, Var, Var, Var) { return causal_unfold(t, a, 1, 6, 2, 2); }, 6, 8},
      {"layer_norm",
       [](Tape& t, Var a, Var, Var, Var c) {
         return layer_norm(t, a, c, scale(t, c, 0.5));
       },
       6, 4},
      {"attention",
       [](Tape& t, Var a, Var b, Var, Var) {
         return attention(t, a, b, mul(t, a, b), 2, 3, 2);
       },
       6, 4},
  };
  for (const auto& c : cases) {
    CAPTURE(c.name);
    const RandomLoss loss(c.rows, c.cols, 99);
    std::vector<Parameter> params{a, b, m, bias};
    const auto r = grad_check(
        params,
        [&](Tape& t) {
          const Var y = c.f(t, t.param(params[0]), t.param(params[1]),
                            t.param(params[2]), t.param(params[3]));
          return loss(t, y);
        },
        1e-5);
    CHECK(r.max_rel_error < 1e-6);
  }
}

TEST_CASE("lstm_cell and dropout match finite differences") {
  Rng rng(22);
  std::vector<Parameter> params{random_param("z", 3, 8, rng, -2.0, 2.0),
                                random_param("c", 3, 2, rng)};
  const RandomLoss loss(6, 2, 5);
  const auto r = grad_check(
      params,
      [&](Tape& t) {
        const auto [h, c] = lstm_cell(t, t.param(params[0]), t.param(params[1]));
        const Var parts[] = {h, c};
        return loss(t, stack_steps(t, parts, 3));
      },
      1e-5);
  CHECK(r.max_rel_error < 1e-6);

  std::vector<Parameter> dp{random_param("x", 5, 4, rng)};
  const RandomLoss dloss(5, 4, 6);
  const auto rd = grad_check(
      dp,
      [&](Tape& t) {
        Rng fixed(3);
        return dloss(t, dropout(t, t.param(dp[0]), 0.4, fixed));
      },
      1e-5);
  CHECK(rd.max_rel_error < 1e-7);
}

TEST_CASE("dropout is inverted and exact at rate zero") {
  Rng rng(1);
  Tape t;
  const Matrix x(200, 50, 1.0);
  const Var same = dropout(t, t.constant(x), 0.0, rng);
  CHECK(t.value(same) == x);
  const Var d = dropout(t, t.constant(x), 0.25, rng);
  double sum = 0.0;
  std::size_t zeros = 0;
  for (double v : t.value(d).values()) {
    sum += v;
    if (v == 0.0) {
      ++zeros;
    } else {
      CHECK(v == doctest::Approx(1.0 / 0.75));
    }
  }
  CHECK(static_cast<double>(zeros) / x.size() == doctest::Approx(0.25).epsilon(0.1));
  CHECK(sum / x.size() == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("tiny lstm passes the gradient check") {
  auto cfg = ModelConfig::defaults(ModelKind::lstm, 3);
  cfg.hidden = 4;
  cfg.init_seed = 17;
  SequenceModel model(cfg);
  const auto probe = random_batch(2, 5, 3, 18);
  Rng rng(19);
  const Matrix target = test::random_matrix(10, 3, rng);
  const auto r = grad_check(model, probe, target, 1e-5);
  CHECK(r.checked == model.parameter_count());
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("small models of every kind pass the gradient check") {
  for (ModelKind kind : kKinds) {
    auto cfg = ModelConfig::defaults(kind, 3);
    cfg.hidden = 6;
    cfg.d_model = 8;
    cfg.ff_dim = 12;
    cfg.heads = 2;
    cfg.kernel = 3;
    cfg.dropout = 0.0;
    cfg.init_seed = 23;
    SequenceModel model(cfg);
    const auto probe = random_batch(2, 7, 3, 24);
    Rng rng(25);
    const Matrix target = test::random_matrix(14, 3, rng);
    CAPTURE(to_string(kind));
    CHECK(grad_check(model, probe, target, 1e-5).max_rel_error < 1e-4);
  }
}

TEST_CASE("a linear read-out passes the gradient check tightly") {
  Rng rng(31);
  std::vector<Parameter> params{random_param("head.w", 5, 3, rng),
                                random_param("head.b", 1, 3, rng)};
  const Matrix x = test::random_matrix(8, 5, rng);
  const RandomLoss loss(8, 3, 32);
  const auto r = grad_check(
      params,
      [&](Tape& t) {
        return loss(t, add_bias(t, matmul(t, t.constant(x), t.param(params[0])),
                                t.param(params[1])));
      },
      1e-5);
  CHECK(r.checked == 18);
  CHECK(r.max_rel_error < 1e-7);
}

TEST_CASE("zero probe with zero targets gives zero gradients") {
  Rng rng(33);
  std::vector<Parameter> params{random_param("head.w", 4, 2, rng)};
  const Matrix x(6, 4);
  const Matrix zero(6, 2);
  const Matrix ones(6, 2, 1.0);
  const auto r = grad_check(
      params,
      [&](Tape& t) {
        return weighted_sq_error(t, matmul(t, t.constant(x), t.param(params[0])),
                                 zero, ones);
      },
      1e-5);
  CHECK(std::abs(r.worst_analytic) < 1e-12);
  CHECK(std::abs(r.worst_numeric) < 1e-12);
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("grad_check validates its inputs") {
  auto model = make_model(ModelKind::lstm, 2, 1, 3);
  const auto probe = random_batch(1, 4, 2, 1);
  const Matrix target(4, 2);
  CHECK(test::error_kind_of([&] { grad_check(model, probe, target, 1e-2); }) ==
        ErrorKind::usage);
  CHECK(test::error_kind_of([&] { grad_check(model, probe, Matrix(3, 2), 1e-5); }) ==
        ErrorKind::usage);
  model.set_train_mode(true);
  CHECK(test::error_kind_of([&] { grad_check(model, probe, target, 1e-5); }) ==
        ErrorKind::usage);
}

TEST_CASE("loss_masked examples") {
  Matrix out(21, 2), orig(21, 2);
  MaskSpec one{21, 2, {}};
  one.entries.push_back({5, std::nullopt, FillAction::zero, {}});
  CHECK(loss_masked(out, orig, one) == 0.0);
  out(5, 0) = 1.0;
  out(5, 1) = -1.0;
  CHECK(loss_masked(out, orig, one) == 1.0);

  Matrix o3(21, 1), x3(21, 1);
  MaskSpec three{21, 1, {}};
  const double mse[] = {0.1, 0.2, 0.3};
  for (std::size_t k = 0; k < 3; ++k) {
    three.entries.push_back({2 * k, std::nullopt, FillAction::random, {0.5}});
    o3(2 * k, 0) = std::sqrt(mse[k]);
  }
  CHECK(loss_masked(o3, x3, three) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(test::error_kind_of([&] { loss_masked(o3, x3, MaskSpec{21, 1, {}}); }) ==
        ErrorKind::usage);
}

TEST_CASE("loss_masked ignores unmasked positions") {
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    MaskPolicy p;
    p.step_mode = trial % 2 == 0;
    const auto spec = sample_mask(21, 3, p, static_cast<std::uint64_t>(trial));
    const Matrix orig = test::random_matrix(21, 3, rng);
    Matrix out = test::random_matrix(21, 3, rng);
    const double before = loss_masked(out, orig, spec);
    const Matrix ind = spec.indicator();
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (ind.values()[i] == 0.0) out.values()[i] += 10.0;
    }
    REQUIRE(loss_masked(out, orig, spec) == before);
  }
}

TEST_CASE("batched masked loss is the mean of per-window losses") {
  Rng rng(42);
  std::vector<MaskSpec> specs;
  Matrix out = test::random_matrix(3 * 21, 4, rng);
  Matrix orig = test::random_matrix(3 * 21, 4, rng);
  double mean = 0.0;
  for (std::size_t w = 0; w < 3; ++w) {
    MaskPolicy p;
    p.step_mode = w != 1;
    specs.push_back(sample_mask(21, 4, p, w));
    Matrix ow(21, 4), xw(21, 4);
    for (std::size_t r = 0; r < 21; ++r) {
      for (std::size_t c = 0; c < 4; ++c) {
        ow(r, c) = out(w * 21 + r, c);
        xw(r, c) = orig(w * 21 + r, c);
      }
    }
    mean += loss_masked(ow, xw, specs.back()) / 3.0;
  }
  Tape t(false);
  const Var l = loss_masked(t, t.constant(out), orig, specs);
  CHECK(t.value(l)(0, 0) == doctest::Approx(mean).epsilon(1e-13));
}

TEST_CASE("loss_nsp examples") {
  Matrix p(1, 4, 1.0), t(1, 4);
  CHECK(loss_nsp(t, t) == 0.0);
  CHECK(loss_nsp(p, t) == 1.0);
  Matrix p2(1, 2), t2(1, 2);
  p2(0, 0) = 3.0;
  CHECK(loss_nsp(p2, t2) == 4.5);
  Matrix pb(2, 2), tb(2, 2);
  pb(0, 0) = 3.0;
  pb(1, 1) = 1.0;
  CHECK(loss_nsp(pb, tb) == doctest::Approx((4.5 + 0.5) / 2.0));
  CHECK(test::error_kind_of([&] { loss_nsp(p, t2); }) == ErrorKind::usage);
}

TEST_CASE("checkpoint round trip is bit exact") {
  test::TempDir dir;
  for (ModelKind kind : kKinds) {
    auto model = make_model(kind, 4, 51, 8);
    model.set_task(Task::mad);
    MaskPolicy policy;
    policy.fill = {0.1, 0.1, 0.8};
    policy.step_mode = false;
    model.set_mask_policy(policy);
    save_checkpoint(model, dir / "m.ckpt");
    const auto back = load_checkpoint(dir / "m.ckpt");
    CHECK(back.config() == model.config());
    CHECK(back.task() == model.task());
    CHECK(back.mask_policy() == policy);
    const auto in = random_batch(2, 9, 4, 52);
    CHECK(back.forward(in).data == model.forward(in).data);
    CHECK(encode_checkpoint(back) == encode_checkpoint(model));
  }
}

TEST_CASE("checkpoint errors are reported as data errors") {
  test::TempDir dir;
  const auto model = make_model(ModelKind::tcn, 3, 1, 4);
  std::string bytes = encode_checkpoint(model);

  std::string flipped = bytes;
  flipped[8] = static_cast<char>(flipped[8] ^ 0x01);
  const auto version_msg =
      test::error_message_of([&] { decode_checkpoint(flipped); });
  CHECK(version_msg.find("version") != std::string::npos);

  const auto kind_msg = test::error_message_of(
      [&] { decode_checkpoint(bytes, ModelKind::lstm); });
  CHECK(kind_msg.find("kind mismatch") != std::string::npos);
  CHECK_NOTHROW(decode_checkpoint(bytes, ModelKind::tcn));

  CHECK(test::error_kind_of([&] {
          decode_checkpoint(std::string_view(bytes).substr(0, bytes.size() - 5));
        }) == ErrorKind::data);
  std::string magic = bytes;
  magic[0] = 'X';
  CHECK(test::error_kind_of([&] { decode_checkpoint(magic); }) == ErrorKind::data);
  CHECK(test::error_kind_of([&] { load_checkpoint(dir / "missing.ckpt"); }) ==
        ErrorKind::data);
}

TEST_CASE("load_parameters rejects mismatched names and shapes") {
  auto model = make_model(ModelKind::lstm, 3, 1, 4);
  std::vector<Parameter> params(model.parameters().begin(), model.parameters().end());
  params[0].name = "bogus";
  CHECK(test::error_kind_of([&] { model.load_parameters(params); }) == ErrorKind::data);
  params[0].name = model.parameters()[0].name;
  params[0].value = Matrix(1, 1);
  CHECK(test::error_kind_of([&] { model.load_parameters(params); }) == ErrorKind::data);
  params.pop_back();
  CHECK(test::error_kind_of([&] { model.load_parameters(params); }) == ErrorKind::data);
}

TEST_CASE("model kinds and tasks parse and print") {
  for (ModelKind kind : kKinds) CHECK(parse_model_kind(to_string(kind)) == kind);
  CHECK(parse_task("mad") == Task::mad);
  CHECK(parse_task("nsp") == Task::nsp);
  CHECK(test::error_kind_of([] { parse_model_kind("gru"); }) == ErrorKind::usage);
}

}
