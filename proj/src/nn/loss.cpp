#include "mad/nn/loss.hpp"

#include "mad/error.hpp"

namespace mad::nn {

Matrix masked_loss_weights(std::span<const MaskSpec> specs, std::size_t steps,
                           std::size_t channels) {
  Matrix w(specs.size() * steps, channels);
  const double batch = static_cast<double>(specs.size());
  for (std::size_t b = 0; b < specs.size(); ++b) {
    const MaskSpec& spec = specs[b];
    if (spec.entries.empty()) throw usage_error("loss_masked: empty mask set");
    if (spec.window_len != steps || spec.channels != channels) {
      throw usage_error("loss_masked: mask spec does not match output shape");
    }
    const double weight =
        1.0 / (batch * static_cast<double>(spec.masked_cells()));
    const Matrix ind = spec.indicator();
    for (std::size_t s = 0; s < steps; ++s) {
      for (std::size_t c = 0; c < channels; ++c) {
        if (ind(s, c) != 0.0) w(b * steps + s, c) = weight;
      }
    }
  }
  return w;
}

double loss_masked(const Matrix& output, const Matrix& original,
                   const MaskSpec& spec) {
  if (!output.same_shape(original)) {
    throw usage_error("loss_masked: output and window shapes differ");
  }
  Tape t(false);
  const Var y = t.constant(output);
  return t.value(loss_masked(t, y, original, std::span(&spec, 1)))(0, 0);
}

Var loss_masked(Tape& t, Var output, const Matrix& originals,
                std::span<const MaskSpec> specs) {
  if (specs.empty()) throw usage_error("loss_masked: empty batch");
  const Matrix& y = t.value(output);
  const std::size_t steps = y.rows() / specs.size();
  if (steps * specs.size() != y.rows()) {
    throw usage_error("loss_masked: output rows not divisible by batch");
  }
  return weighted_sq_error(t, output, originals,
                           masked_loss_weights(specs, steps, y.cols()));
}

double loss_nsp(const Matrix& pred, const Matrix& target) {
  Tape t(false);
  return t.value(loss_nsp(t, t.constant(pred), target))(0, 0);
}

Var loss_nsp(Tape& t, Var pred, const Matrix& target) {
  const Matrix& p = t.value(pred);
  if (!p.same_shape(target) || p.empty()) {
    throw usage_error("loss_nsp: prediction and target shapes differ");
  }
  const Matrix w(p.rows(), p.cols(), 1.0 / static_cast<double>(p.size()));
  return weighted_sq_error(t, pred, target, w);
}

}  // namespace mad::nn
