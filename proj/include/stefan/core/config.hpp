#pragma once

namespace stefan {

/// Physical and regularization parameters of the dimensionless
/// one-dimensional melting problem, plus the space-time window.
///
/// Defaults are the Ste = 0.5 validation case. `theta_r` has no published
/// value; -0.1 is a configurable choice.
struct StefanConfig {
  double fo = 0.01;       ///< Fourier number
  double ste = 0.5;       ///< Stefan number
  double delta = 0.05;    ///< width of the regularized liquid fraction
  double theta_l = 1.0;   ///< left-wall (hot) temperature
  double theta_r = -0.1;  ///< initial / far-field (cold) temperature
  double t0 = 0.05;
  double t1 = 1.0;
  double x0 = 0.0;
  double x1 = 1.0;

  /// Throws ConfigError naming the first violated invariant.
  void validate() const;
};

}  // namespace stefan
