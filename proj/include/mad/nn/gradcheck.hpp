#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "mad/nn/autodiff.hpp"
#include "mad/nn/model.hpp"

namespace mad::nn {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Compares the tape gradient of every parameter scalar with the central
// difference (L(theta + eps) - L(theta - eps)) / (2 eps). The relative error
// is |a - f| / max(|a|, |f|, 1e-8).
GradCheckResult grad_check(std::span<Parameter> params,
                           const std::function<Var(Tape&)>& loss_fn,
                           double eps);

// Loss: mean squared error of the model output against `target`. The model
// must be in inference mode.
GradCheckResult grad_check(SequenceModel& model, const SequenceBatch& probe,
                           const Matrix& target, double eps);

}  // namespace mad::nn
