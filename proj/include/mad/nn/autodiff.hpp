#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mad/matrix.hpp"
#include "mad/rng.hpp"

namespace mad::nn {

// A named trainable matrix with its accumulated gradient.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  void zero_grad() { grad = Matrix(value.rows(), value.cols()); }
};

// Handle to a node on a Tape.
struct Var {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  std::size_t id = npos;
  bool valid() const noexcept { return id != npos; }
};

// Records matrix-valued operations in creation order; reverse iteration over
// that order is a valid topological sweep for backward().
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Matrix& out_grad)>;

  // With record = false no backward closures are kept (inference).
  explicit Tape(bool record = true) : record_(record) {}

  Var constant(Matrix value);
  Var param(Parameter& p);

  const Matrix& value(Var v) const { return nodes_.at(v.id).value; }
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
  bool recording() const noexcept { return record_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  // Adds a node. `fn` is kept only when recording and some input requires a
  // gradient.
  Var push(Matrix value, bool requires_grad, BackwardFn fn);

  // Gradient accumulator of `v`, allocated as zeros on first use.
  Matrix& grad(Var v);

  // Seeds d(loss)/d(loss) = 1, sweeps the tape, and adds parameter gradients
  // into Parameter::grad. `loss` must be 1x1. A tape can be swept once.
  void backward(Var loss);

  void reset();

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
  };

  std::vector<Node> nodes_;
  bool record_;
  bool consumed_ = false;
};

Var matmul(Tape& t, Var a, Var b);
Var add(Tape& t, Var a, Var b);
// Adds a 1 x cols row vector to every row.
Var add_bias(Tape& t, Var a, Var bias);
Var mul(Tape& t, Var a, Var b);
Var scale(Tape& t, Var a, double c);
Var sigmoid(Tape& t, Var a);
Var tanh(Tape& t, Var a);
// Exact (erf) GELU.
Var gelu(Tape& t, Var a);
Var slice_cols(Tape& t, Var a, std::size_t start, std::size_t count);

// Sequence tensors are stored as (batch * steps) x features with row index
// b * steps + s.

// Rows of step `s` for every batch element: batch x features.
Var take_step(Tape& t, Var x, std::size_t batch, std::size_t steps,
              std::size_t s);
// Inverse of take_step over all steps.
Var stack_steps(Tape& t, std::span<const Var> per_step, std::size_t batch);
// Row (b, s) becomes [x(b, s - (k-1)d), ..., x(b, s - d), x(b, s)], with zeros
// before the sequence start.
Var causal_unfold(Tape& t, Var x, std::size_t batch, std::size_t steps,
                  std::size_t kernel, std::size_t dilation);
// Row-wise layer normalisation with affine 1 x cols gamma and beta.
Var layer_norm(Tape& t, Var x, Var gamma, Var beta, double eps = 1e-5);
// Scaled dot-product self-attention per batch element and head over
// (batch * steps) x d_model projections.
Var attention(Tape& t, Var q, Var k, Var v, std::size_t batch,
              std::size_t steps, std::size_t heads);
// LSTM cell on pre-activations z = [i f g o] (batch x 4h):
// c = sigmoid(f) c_prev + sigmoid(i) tanh(g), h = sigmoid(o) tanh(c).
// An invalid c_prev stands for a zero state. Returns {h, c}.
std::pair<Var, Var> lstm_cell(Tape& t, Var z, Var c_prev);
// Inverted dropout. Identity when rate == 0.
Var dropout(Tape& t, Var x, double rate, Rng& rng);

// sum_ij w_ij (y_ij - target_ij)^2 - offset as a 1x1 node; target and
// weights are constants. The offset is removed before the single rounding to
// double.
Var weighted_sq_error(Tape& t, Var y, const Matrix& target,
                      const Matrix& weights, double offset = 0.0);

}  // namespace mad::nn
