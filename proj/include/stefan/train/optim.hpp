#pragma once

#include <Eigen/Dense>

namespace stefan::train {

/// Bias-corrected Adam moments for one parameter vector.
struct AdamState {
  Eigen::VectorXd m, v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  explicit AdamState(Eigen::Index n) : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}
};

/// params -= lr * mhat / (sqrt(vhat) + eps). Throws ConfigError on a size
/// mismatch.
void adam_step(AdamState& state, Eigen::Ref<Eigen::VectorXd> params,
               const Eigen::Ref<const Eigen::VectorXd>& grad, double lr);

/// t -> eta * gamma^(t / kappa).
struct LrSchedule {
  double eta = 1e-3;
  double gamma = 0.9;
  double kappa = 8000.0;

  double rate(double t) const;
  /// Throws ConfigError unless eta > 0, 0 < gamma <= 1, kappa > 0.
  void validate() const;
};

enum class DynamicVariant {
  kPrinted,   ///< (1-a) w + a max|grad L_r| / (w mean|grad L|)
  kUnscaled,  ///< (1-a) w + a max|grad L_r| / mean|grad L|
};

/// One dynamic weight update from gradient statistics of the unweighted
/// residual loss (max of entry magnitudes) and of the family loss (mean of
/// entry magnitudes). Throws DegenerateStats when mean_abs_family is zero
/// or either statistic is not finite; ConfigError for omega <= 0 or alpha
/// outside [0, 1].
double dynamic_reweight(double omega, double max_abs_residual, double mean_abs_family,
                        double alpha = 0.6, DynamicVariant variant = DynamicVariant::kPrinted);

}  // namespace stefan::train
