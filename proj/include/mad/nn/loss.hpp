#pragma once

#include <span>

#include "mad/masking.hpp"
#include "mad/matrix.hpp"
#include "mad/nn/autodiff.hpp"

namespace mad::nn {

// Masked reconstruction loss of one window: mean squared error over the
// masked cells, i.e. (1/|M|)(1/n) sum_{m in M} sum_j (y_m^j - x_m^j)^2 in
// step mode. `original` is the uncorrupted window.
double loss_masked(const Matrix& output, const Matrix& original,
                   const MaskSpec& spec);

// Batched form over (batch * steps) x n tensors: the mean of the per-window
// masked losses.
Var loss_masked(Tape& t, Var output, const Matrix& originals,
                std::span<const MaskSpec> specs);

// Next-step loss: mean over the batch of (1/n) sum_j (pred^j - target^j)^2.
double loss_nsp(const Matrix& pred, const Matrix& target);
Var loss_nsp(Tape& t, Var pred, const Matrix& target);

// Weights with 1 / (batch * masked cells of the window) on masked cells.
Matrix masked_loss_weights(std::span<const MaskSpec> specs, std::size_t steps,
                           std::size_t channels);

}  // namespace mad::nn
