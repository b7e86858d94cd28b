#include "mad/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "mad/error.hpp"
#include "mad/nn/loss.hpp"

namespace mad::nn {

GradCheckResult grad_check(std::span<Parameter> params,
                           const std::function<Var(Tape&)>& loss_fn,
                           double eps) {
  if (!(eps >= 1e-6 && eps <= 1e-3)) {
    throw usage_error("grad_check: eps must lie in [1e-6, 1e-3]");
  }
  auto evaluate = [&] {
    Tape t(false);
    const double v = t.value(loss_fn(t))(0, 0);
    if (!std::isfinite(v)) throw numerical_error("grad_check: non-finite loss");
    return v;
  };

  for (auto& p : params) p.zero_grad();
  {
    Tape t(true);
    const Var loss = loss_fn(t);
    if (!std::isfinite(t.value(loss)(0, 0))) {
      throw numerical_error("grad_check: non-finite loss");
    }
    t.backward(loss);
  }

  GradCheckResult result;
  for (auto& p : params) {
    if (!p.grad.same_shape(p.value)) p.zero_grad();
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      double& theta = p.value.values()[i];
      const double saved = theta;
      theta = saved + eps;
      const double plus = evaluate();
      theta = saved - eps;
      const double minus = evaluate();
      theta = saved;
      const double numeric = (plus - minus) / (2.0 * eps);
      const double analytic = p.grad.values()[i];
      const double denom =
          std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      const double rel = std::abs(analytic - numeric) / denom;
      ++result.checked;
      if (rel > result.max_rel_error || result.worst_parameter.empty()) {
        result.max_rel_error = rel;
        result.worst_parameter = p.name;
        result.worst_index = i;
        result.worst_analytic = analytic;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

GradCheckResult grad_check(SequenceModel& model, const SequenceBatch& probe,
                           const Matrix& target, double eps) {
  if (model.train_mode()) {
    throw usage_error("grad_check needs the model in inference mode");
  }
  if (!probe.data.same_shape(target)) {
    throw usage_error("grad_check: probe and target shapes differ");
  }
  const Matrix weights(target.rows(), target.cols(),
                       1.0 / static_cast<double>(target.size()));
  // Subtracting the loss at the unperturbed parameters leaves every
  // difference quotient unchanged and keeps L(theta +- eps) small.
  double offset = 0.0;
  const auto loss_fn = [&](Tape& t) {
    const Var x = t.constant(probe.data);
    const Var y = model.forward(t, x, probe.batch, probe.steps);
    return weighted_sq_error(t, y, target, weights, offset);
  };
  {
    Tape t(false);
    offset = t.value(loss_fn(t))(0, 0);
  }
  return grad_check(model.parameters(), loss_fn, eps);
}

}  // namespace mad::nn
