#include "stefan/train/optim.hpp"

#include <cmath>

#include "stefan/core/errors.hpp"

namespace stefan::train {

void adam_step(AdamState& s, Eigen::Ref<Eigen::VectorXd> params,
               const Eigen::Ref<const Eigen::VectorXd>& grad, double lr) {
  if (s.m.size() != params.size() || s.v.size() != params.size() ||
      grad.size() != params.size()) {
    throw ConfigError("adam state, parameters and gradient differ in size");
  }
  ++s.step;
  const double t = static_cast<double>(s.step);
  const double c1 = 1.0 - std::pow(s.beta1, t);
  const double c2 = 1.0 - std::pow(s.beta2, t);
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double g = grad[i];
    s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * g;
    s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * g * g;
    const double mhat = s.m[i] / c1;
    const double vhat = s.v[i] / c2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + s.eps);
  }
}

double LrSchedule::rate(double t) const { return eta * std::pow(gamma, t / kappa); }

void LrSchedule::validate() const {
  if (!(eta > 0.0)) throw ConfigError("learning rate eta must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("decay gamma must lie in (0, 1]");
  if (!(kappa > 0.0)) throw ConfigError("decay interval kappa must be positive");
}

double dynamic_reweight(double omega, double max_abs_residual, double mean_abs_family,
                        double alpha, DynamicVariant variant) {
  if (!(omega > 0.0)) throw ConfigError("dynamic weight must be positive");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (!(mean_abs_family > 0.0) || !std::isfinite(mean_abs_family) ||
      !std::isfinite(max_abs_residual)) {
    throw DegenerateStats("gradient statistics are degenerate");
  }
  const double ratio = max_abs_residual / mean_abs_family;
  const double target = variant == DynamicVariant::kPrinted ? ratio / omega : ratio;
  return (1.0 - alpha) * omega + alpha * target;
}

}  // namespace stefan::train
