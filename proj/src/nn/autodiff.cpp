#include "mad/nn/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "mad/error.hpp"

namespace mad::nn {

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, {}, nullptr, false});
  return Var{nodes_.size() - 1};
}

Var Tape::param(Parameter& p) {
  nodes_.push_back(Node{p.value, {}, {}, &p, record_});
  return Var{nodes_.size() - 1};
}

Var Tape::push(Matrix value, bool requires_grad, BackwardFn fn) {
  const bool keep = record_ && requires_grad;
  nodes_.push_back(
      Node{std::move(value), {}, keep ? std::move(fn) : BackwardFn{}, nullptr,
           keep});
  return Var{nodes_.size() - 1};
}

Matrix& Tape::grad(Var v) {
  Node& node = nodes_.at(v.id);
  if (node.grad.empty()) {
    node.grad = Matrix(node.value.rows(), node.value.cols());
  }
  return node.grad;
}

void Tape::backward(Var loss) {
  if (consumed_) {
    throw usage_error("backward called twice on the same tape without reset");
  }
  if (!loss.valid() || loss.id >= nodes_.size()) {
    throw usage_error("backward called before a forward pass was recorded");
  }
  if (!record_) throw usage_error("backward on a non-recording tape");
  Node& root = nodes_[loss.id];
  if (root.value.rows() != 1 || root.value.cols() != 1) {
    throw usage_error("backward needs a scalar loss");
  }
  consumed_ = true;
  grad(loss)(0, 0) = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (node.grad.empty()) continue;
    if (node.backward) node.backward(*this, node.grad);
    if (node.param) {
      Parameter& p = *node.param;
      if (!p.grad.same_shape(p.value)) p.zero_grad();
      const auto src = node.grad.values();
      auto dst = p.grad.values();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
  }
}

void Tape::reset() {
  nodes_.clear();
  consumed_ = false;
}

namespace {

void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) {
    throw usage_error(std::string(op) + ": shape mismatch " +
                      std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                      " vs " + std::to_string(b.rows()) + "x" +
                      std::to_string(b.cols()));
  }
}

void add_into(Matrix& dst, const Matrix& src) {
  auto d = dst.values();
  const auto s = src.values();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

template <typename F, typename D>
Var unary(Tape& t, Var a, F f, D df) {
  Matrix out = t.value(a);
  for (auto& v : out.values()) v = f(v);
  return t.push(std::move(out), t.requires_grad(a),
                [a, df](Tape& tape, const Matrix& g) {
                  const Matrix& x = tape.value(a);
                  auto& ga = tape.grad(a);
                  const auto xv = x.values();
                  const auto gv = g.values();
                  auto gav = ga.values();
                  for (std::size_t i = 0; i < gv.size(); ++i) {
                    gav[i] += gv[i] * df(xv[i]);
                  }
                });
}

}  // namespace

Var matmul(Tape& t, Var a, Var b) {
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  if (av.cols() != bv.rows()) {
    throw usage_error("matmul: inner dimensions differ (" +
                      std::to_string(av.cols()) + " vs " +
                      std::to_string(bv.rows()) + ")");
  }
  Matrix out;
  mad::matmul(av, bv, out);
  return t.push(std::move(out), t.requires_grad(a) || t.requires_grad(b),
                [a, b](Tape& tape, const Matrix& g) {
                  if (tape.requires_grad(a)) {
                    matmul_nt(g, tape.value(b), tape.grad(a), true);
                  }
                  if (tape.requires_grad(b)) {
                    matmul_tn(tape.value(a), g, tape.grad(b), true);
                  }
                });
}

Var add(Tape& t, Var a, Var b) {
  check_same_shape(t.value(a), t.value(b), "add");
  Matrix out = t.value(a);
  add_into(out, t.value(b));
  return t.push(std::move(out), t.requires_grad(a) || t.requires_grad(b),
                [a, b](Tape& tape, const Matrix& g) {
                  if (tape.requires_grad(a)) add_into(tape.grad(a), g);
                  if (tape.requires_grad(b)) add_into(tape.grad(b), g);
                });
}

Var add_bias(Tape& t, Var a, Var bias) {
  const Matrix& bv = t.value(bias);
  Matrix out = t.value(a);
  if (bv.rows() != 1 || bv.cols() != out.cols()) {
    throw usage_error("add_bias: bias must be 1 x cols");
  }
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += bv(0, c);
  }
  return t.push(std::move(out), t.requires_grad(a) || t.requires_grad(bias),
                [a, bias](Tape& tape, const Matrix& g) {
                  if (tape.requires_grad(a)) add_into(tape.grad(a), g);
                  if (tape.requires_grad(bias)) {
                    auto& gb = tape.grad(bias);
                    for (std::size_t r = 0; r < g.rows(); ++r) {
                      const auto row = g.row(r);
                      for (std::size_t c = 0; c < row.size(); ++c) {
                        gb(0, c) += row[c];
                      }
                    }
                  }
                });
}

Var mul(Tape& t, Var a, Var b) {
  check_same_shape(t.value(a), t.value(b), "mul");
  Matrix out = t.value(a);
  {
    auto o = out.values();
    const auto bv = t.value(b).values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bv[i];
  }
  return t.push(std::move(out), t.requires_grad(a) || t.requires_grad(b),
                [a, b](Tape& tape, const Matrix& g) {
                  const auto gv = g.values();
                  if (tape.requires_grad(a)) {
                    auto ga = tape.grad(a).values();
                    const auto bv = tape.value(b).values();
                    for (std::size_t i = 0; i < gv.size(); ++i) ga[i] += gv[i] * bv[i];
                  }
                  if (tape.requires_grad(b)) {
                    auto gb = tape.grad(b).values();
                    const auto av = tape.value(a).values();
                    for (std::size_t i = 0; i < gv.size(); ++i) gb[i] += gv[i] * av[i];
                  }
                });
}

Var scale(Tape& t, Var a, double c) {
  return unary(
      t, a, [c](double x) { return c * x; }, [c](double) { return c; });
}

Var sigmoid(Tape& t, Var a) {
  return unary(
      t, a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double x) {
        const double s = 1.0 / (1.0 + std::exp(-x));
        return s * (1.0 - s);
      });
}

Var tanh(Tape& t, Var a) {
  return unary(
      t, a, [](double x) { return std::tanh(x); },
      [](double x) {
        const double th = std::tanh(x);
        return 1.0 - th * th;
      });
}

Var gelu(Tape& t, Var a) {
  constexpr double kInvSqrt2 = 0.7071067811865476;
  constexpr double kInvSqrt2Pi = 0.3989422804014327;
  return unary(
      t, a, [](double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); },
      [](double x) {
        return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) +
               x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
      });
}

Var slice_cols(Tape& t, Var a, std::size_t start, std::size_t count) {
  const Matrix& av = t.value(a);
  if (start + count > av.cols()) throw usage_error("slice_cols out of range");
  Matrix out(av.rows(), count);
  for (std::size_t r = 0; r < av.rows(); ++r) {
    std::copy_n(av.row(r).data() + start, count, out.row(r).data());
  }
  return t.push(std::move(out), t.requires_grad(a),
                [a, start, count](Tape& tape, const Matrix& g) {
                  auto& ga = tape.grad(a);
                  for (std::size_t r = 0; r < g.rows(); ++r) {
                    double* dst = ga.row(r).data() + start;
                    const double* src = g.row(r).data();
                    for (std::size_t c = 0; c < count; ++c) dst[c] += src[c];
                  }
                });
}

Var take_step(Tape& t, Var x, std::size_t batch, std::size_t steps,
              std::size_t s) {
  const Matrix& xv = t.value(x);
  if (xv.rows() != batch * steps || s >= steps) {
    throw usage_error("take_step: bad sequence layout");
  }
  Matrix out(batch, xv.cols());
  for (std::size_t b = 0; b < batch; ++b) {
    std::copy_n(xv.row(b * steps + s).data(), xv.cols(), out.row(b).data());
  }
  return t.push(std::move(out), t.requires_grad(x),
                [x, steps, s](Tape& tape, const Matrix& g) {
                  auto& gx = tape.grad(x);
                  for (std::size_t b = 0; b < g.rows(); ++b) {
                    double* dst = gx.row(b * steps + s).data();
                    const double* src = g.row(b).data();
                    for (std::size_t c = 0; c < g.cols(); ++c) dst[c] += src[c];
                  }
                });
}

Var stack_steps(Tape& t, std::span<const Var> per_step, std::size_t batch) {
  const std::size_t steps = per_step.size();
  if (steps == 0) throw usage_error("stack_steps: empty sequence");
  const std::size_t cols = t.value(per_step[0]).cols();
  Matrix out(batch * steps, cols);
  bool needs = false;
  for (std::size_t s = 0; s < steps; ++s) {
    const Matrix& v = t.value(per_step[s]);
    if (v.rows() != batch || v.cols() != cols) {
      throw usage_error("stack_steps: inconsistent step shapes");
    }
    for (std::size_t b = 0; b < batch; ++b) {
      std::copy_n(v.row(b).data(), cols, out.row(b * steps + s).data());
    }
    needs = needs || t.requires_grad(per_step[s]);
  }
  std::vector<Var> inputs(per_step.begin(), per_step.end());
  return t.push(std::move(out), needs,
                [inputs = std::move(inputs)](Tape& tape, const Matrix& g) {
                  const std::size_t steps = inputs.size();
                  for (std::size_t s = 0; s < steps; ++s) {
                    if (!tape.requires_grad(inputs[s])) continue;
                    auto& gs = tape.grad(inputs[s]);
                    for (std::size_t b = 0; b < gs.rows(); ++b) {
                      double* dst = gs.row(b).data();
                      const double* src = g.row(b * steps + s).data();
                      for (std::size_t c = 0; c < gs.cols(); ++c) dst[c] += src[c];
                    }
                  }
                });
}

Var causal_unfold(Tape& t, Var x, std::size_t batch, std::size_t steps,
                  std::size_t kernel, std::size_t dilation) {
  const Matrix& xv = t.value(x);
  if (xv.rows() != batch * steps) {
    throw usage_error("causal_unfold: bad sequence layout");
  }
  const std::size_t c_in = xv.cols();
  Matrix out(batch * steps, kernel * c_in);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t s = 0; s < steps; ++s) {
      double* dst = out.row(b * steps + s).data();
      for (std::size_t k = 0; k < kernel; ++k) {
        const std::size_t lag = (kernel - 1 - k) * dilation;
        if (lag > s) continue;
        std::copy_n(xv.row(b * steps + s - lag).data(), c_in, dst + k * c_in);
      }
    }
  }
  return t.push(std::move(out), t.requires_grad(x),
                [x, batch, steps, kernel, dilation, c_in](Tape& tape,
                                                          const Matrix& g) {
                  auto& gx = tape.grad(x);
                  for (std::size_t b = 0; b < batch; ++b) {
                    for (std::size_t s = 0; s < steps; ++s) {
                      const double* src = g.row(b * steps + s).data();
                      for (std::size_t k = 0; k < kernel; ++k) {
                        const std::size_t lag = (kernel - 1 - k) * dilation;
                        if (lag > s) continue;
                        double* dst = gx.row(b * steps + s - lag).data();
                        for (std::size_t c = 0; c < c_in; ++c) {
                          dst[c] += src[k * c_in + c];
                        }
                      }
                    }
                  }
                });
}

Var layer_norm(Tape& t, Var x, Var gamma, Var beta, double eps) {
  const Matrix& xv = t.value(x);
  const Matrix& gv = t.value(gamma);
  const Matrix& bv = t.value(beta);
  const std::size_t rows = xv.rows(), cols = xv.cols();
  if (gv.rows() != 1 || gv.cols() != cols || !bv.same_shape(gv)) {
    throw usage_error("layer_norm: gamma/beta must be 1 x cols");
  }
  Matrix xhat(rows, cols);
  std::vector<double> inv_std(rows);
  Matrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto in = xv.row(r);
    double mean = 0.0;
    for (double v : in) mean += v;
    mean /= static_cast<double>(cols);
    double var = 0.0;
    for (double v : in) var += (v - mean) * (v - mean);
    var /= static_cast<double>(cols);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < cols; ++c) {
      xhat(r, c) = (in[c] - mean) * inv_std[r];
      out(r, c) = xhat(r, c) * gv(0, c) + bv(0, c);
    }
  }
  const bool needs =
      t.requires_grad(x) || t.requires_grad(gamma) || t.requires_grad(beta);
  return t.push(
      std::move(out), needs,
      [x, gamma, beta, xhat = std::move(xhat),
       inv_std = std::move(inv_std)](Tape& tape, const Matrix& g) {
        const std::size_t rows = g.rows(), cols = g.cols();
        const Matrix& gam = tape.value(gamma);
        if (tape.requires_grad(gamma) || tape.requires_grad(beta)) {
          Matrix dg(1, cols), db(1, cols);
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
              dg(0, c) += g(r, c) * xhat(r, c);
              db(0, c) += g(r, c);
            }
          }
          if (tape.requires_grad(gamma)) add_into(tape.grad(gamma), dg);
          if (tape.requires_grad(beta)) add_into(tape.grad(beta), db);
        }
        if (!tape.requires_grad(x)) return;
        auto& gx = tape.grad(x);
        std::vector<double> dxhat(cols);
        for (std::size_t r = 0; r < rows; ++r) {
          double mean_d = 0.0, mean_dx = 0.0;
          for (std::size_t c = 0; c < cols; ++c) {
            dxhat[c] = g(r, c) * gam(0, c);
            mean_d += dxhat[c];
            mean_dx += dxhat[c] * xhat(r, c);
          }
          mean_d /= static_cast<double>(cols);
          mean_dx /= static_cast<double>(cols);
          for (std::size_t c = 0; c < cols; ++c) {
            gx(r, c) += inv_std[r] * (dxhat[c] - mean_d - xhat(r, c) * mean_dx);
          }
        }
      });
}

Var attention(Tape& t, Var q, Var k, Var v, std::size_t batch,
              std::size_t steps, std::size_t heads) {
  const Matrix& qv = t.value(q);
  const Matrix& kv = t.value(k);
  const Matrix& vv = t.value(v);
  const std::size_t d = qv.cols();
  if (!qv.same_shape(kv) || !qv.same_shape(vv) || qv.rows() != batch * steps ||
      heads == 0 || d % heads != 0) {
    throw usage_error("attention: inconsistent shapes");
  }
  const std::size_t dh = d / heads;
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(dh));
  // Softmax weights, [batch][head][query][key].
  std::vector<double> probs(batch * heads * steps * steps);
  Matrix out(batch * steps, d);
  std::vector<double> srow(steps);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t h = 0; h < heads; ++h) {
      double* p = probs.data() + (b * heads + h) * steps * steps;
      for (std::size_t i = 0; i < steps; ++i) {
        const double* qi = qv.row(b * steps + i).data() + h * dh;
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < steps; ++j) {
          const double* kj = kv.row(b * steps + j).data() + h * dh;
          double s = 0.0;
          for (std::size_t c = 0; c < dh; ++c) s += qi[c] * kj[c];
          srow[j] = s * inv_scale;
          mx = std::max(mx, srow[j]);
        }
        double z = 0.0;
        for (std::size_t j = 0; j < steps; ++j) {
          srow[j] = std::exp(srow[j] - mx);
          z += srow[j];
        }
        double* oi = out.row(b * steps + i).data() + h * dh;
        for (std::size_t j = 0; j < steps; ++j) {
          const double pij = srow[j] / z;
          p[i * steps + j] = pij;
          const double* vj = vv.row(b * steps + j).data() + h * dh;
          for (std::size_t c = 0; c < dh; ++c) oi[c] += pij * vj[c];
        }
      }
    }
  }
  const bool needs =
      t.requires_grad(q) || t.requires_grad(k) || t.requires_grad(v);
  return t.push(
      std::move(out), needs,
      [q, k, v, batch, steps, heads, dh, inv_scale,
       probs = std::move(probs)](Tape& tape, const Matrix& g) {
        const Matrix& qv = tape.value(q);
        const Matrix& kv = tape.value(k);
        const Matrix& vv = tape.value(v);
        Matrix& gq = tape.grad(q);
        Matrix& gk = tape.grad(k);
        Matrix& gv = tape.grad(v);
        std::vector<double> dp(steps), ds(steps);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t h = 0; h < heads; ++h) {
            const double* p = probs.data() + (b * heads + h) * steps * steps;
            for (std::size_t i = 0; i < steps; ++i) {
              const double* gi = g.row(b * steps + i).data() + h * dh;
              double dot = 0.0;
              for (std::size_t j = 0; j < steps; ++j) {
                const double* vj = vv.row(b * steps + j).data() + h * dh;
                double* gvj = gv.row(b * steps + j).data() + h * dh;
                const double pij = p[i * steps + j];
                double s = 0.0;
                for (std::size_t c = 0; c < dh; ++c) {
                  s += gi[c] * vj[c];
                  gvj[c] += pij * gi[c];
                }
                dp[j] = s;
                dot += pij * s;
              }
              for (std::size_t j = 0; j < steps; ++j) {
                ds[j] = p[i * steps + j] * (dp[j] - dot) * inv_scale;
              }
              const double* qi = qv.row(b * steps + i).data() + h * dh;
              double* gqi = gq.row(b * steps + i).data() + h * dh;
              for (std::size_t j = 0; j < steps; ++j) {
                const double* kj = kv.row(b * steps + j).data() + h * dh;
                double* gkj = gk.row(b * steps + j).data() + h * dh;
                for (std::size_t c = 0; c < dh; ++c) {
                  gqi[c] += ds[j] * kj[c];
                  gkj[c] += ds[j] * qi[c];
                }
              }
            }
          }
        }
      });
}

Var dropout(Tape& t, Var x, double rate, Rng& rng) {
  if (rate <= 0.0) return x;
  if (rate >= 1.0) throw usage_error("dropout rate must be < 1");
  const double keep_scale = 1.0 / (1.0 - rate);
  Matrix mask(t.value(x).rows(), t.value(x).cols());
  for (auto& m : mask.values()) m = uniform01(rng) < rate ? 0.0 : keep_scale;
  Matrix out = t.value(x);
  {
    auto o = out.values();
    const auto mv = mask.values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] *= mv[i];
  }
  return t.push(std::move(out), t.requires_grad(x),
                [x, mask = std::move(mask)](Tape& tape, const Matrix& g) {
                  auto gx = tape.grad(x).values();
                  const auto gv = g.values();
                  const auto mv = mask.values();
                  for (std::size_t i = 0; i < gv.size(); ++i) gx[i] += gv[i] * mv[i];
                });
}

std::pair<Var, Var> lstm_cell(Tape& t, Var z, Var c_prev) {
  const Matrix& zv = t.value(z);
  if (zv.cols() % 4 != 0) throw usage_error("lstm_cell: width not a multiple of 4");
  const std::size_t rows = zv.rows(), h = zv.cols() / 4;
  const bool has_prev = c_prev.valid();
  if (has_prev && (t.value(c_prev).rows() != rows || t.value(c_prev).cols() != h)) {
    throw usage_error("lstm_cell: state shape mismatch");
  }
  // Activated gates [sigmoid(i) sigmoid(f) tanh(g) sigmoid(o)].
  auto gates = std::make_shared<Matrix>(rows, 4 * h);
  Matrix c(rows, h);
  auto tanh_c = std::make_shared<Matrix>(rows, h);
  Matrix hv(rows, h);
  auto sig = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  for (std::size_t r = 0; r < rows; ++r) {
    const auto zr = zv.row(r);
    auto gr = gates->row(r);
    for (std::size_t j = 0; j < h; ++j) {
      gr[j] = sig(zr[j]);
      gr[h + j] = sig(zr[h + j]);
      gr[2 * h + j] = std::tanh(zr[2 * h + j]);
      gr[3 * h + j] = sig(zr[3 * h + j]);
      const double carry = has_prev ? gr[h + j] * t.value(c_prev)(r, j) : 0.0;
      c(r, j) = carry + gr[j] * gr[2 * h + j];
      (*tanh_c)(r, j) = std::tanh(c(r, j));
      hv(r, j) = gr[3 * h + j] * (*tanh_c)(r, j);
    }
  }
  const bool needs = t.requires_grad(z) || (has_prev && t.requires_grad(c_prev));
  const Var cv = t.push(
      std::move(c), needs, [z, c_prev, has_prev, gates](Tape& tape, const Matrix& g) {
        const std::size_t h = g.cols();
        const bool zg = tape.requires_grad(z);
        const bool cg = has_prev && tape.requires_grad(c_prev);
        for (std::size_t r = 0; r < g.rows(); ++r) {
          const auto gr = gates->row(r);
          for (std::size_t j = 0; j < h; ++j) {
            const double gc = g(r, j);
            const double cp = has_prev ? tape.value(c_prev)(r, j) : 0.0;
            if (zg) {
              auto dz = tape.grad(z).row(r);
              const double i = gr[j], f = gr[h + j], u = gr[2 * h + j];
              dz[j] += gc * u * i * (1.0 - i);
              dz[h + j] += gc * cp * f * (1.0 - f);
              dz[2 * h + j] += gc * i * (1.0 - u * u);
            }
            if (cg) tape.grad(c_prev)(r, j) += gc * gr[h + j];
          }
        }
      });
  const Var hn = t.push(
      std::move(hv), needs, [z, cv, gates, tanh_c](Tape& tape, const Matrix& g) {
        const std::size_t h = g.cols();
        const bool zg = tape.requires_grad(z);
        Matrix& dc = tape.grad(cv);
        for (std::size_t r = 0; r < g.rows(); ++r) {
          const auto gr = gates->row(r);
          for (std::size_t j = 0; j < h; ++j) {
            const double gh = g(r, j), o = gr[3 * h + j], tc = (*tanh_c)(r, j);
            if (zg) tape.grad(z)(r, 3 * h + j) += gh * tc * o * (1.0 - o);
            dc(r, j) += gh * o * (1.0 - tc * tc);
          }
        }
      });
  return {hn, cv};
}

Var weighted_sq_error(Tape& t, Var y, const Matrix& target,
                      const Matrix& weights, double offset) {
  const Matrix& yv = t.value(y);
  check_same_shape(yv, target, "weighted_sq_error");
  check_same_shape(yv, weights, "weighted_sq_error");
  const auto yy = yv.values();
  const auto tt = target.values();
  const auto ww = weights.values();
  // Extended accumulator keeps the reduction error near one rounding.
  long double sum = 0.0L;
  for (std::size_t i = 0; i < yy.size(); ++i) {
    const long double e = static_cast<long double>(yy[i]) - tt[i];
    sum += static_cast<long double>(ww[i]) * e * e;
  }
  Matrix out(1, 1, static_cast<double>(sum - offset));
  return t.push(std::move(out), t.requires_grad(y),
                [y, target, weights](Tape& tape, const Matrix& g) {
                  const double s = g(0, 0);
                  const auto yy = tape.value(y).values();
                  const auto tt = target.values();
                  const auto ww = weights.values();
                  auto gy = tape.grad(y).values();
                  for (std::size_t i = 0; i < yy.size(); ++i) {
                    gy[i] += s * 2.0 * ww[i] * (yy[i] - tt[i]);
                  }
                });
}

}  // namespace mad::nn
