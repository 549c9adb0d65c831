#include "stefan/core/regularization.hpp"

#include <cmath>

namespace stefan {

double phi_delta(double theta, double delta) noexcept {
  return 0.5 * (1.0 + std::tanh(theta / delta));
}

double phi_delta_prime(double theta, double delta) noexcept {
  const double c = std::cosh(theta / delta);
  return 0.5 / (delta * c * c);
}

double phi_delta_second(double theta, double delta) noexcept {
  const double z = theta / delta;
  const double c = std::cosh(z);
  return -std::tanh(z) / (delta * delta * c * c);
}

double effective_diffusivity(double theta, const StefanConfig& cfg) noexcept {
  return cfg.fo / (1.0 + phi_delta_prime(theta, cfg.delta) / cfg.ste);
}

double effective_diffusivity_prime(double theta,
                                   const StefanConfig& cfg) noexcept {
  const double denom = 1.0 + phi_delta_prime(theta, cfg.delta) / cfg.ste;
  return -cfg.fo * phi_delta_second(theta, cfg.delta) /
         (cfg.ste * denom * denom);
}

double enthalpy(double theta, const StefanConfig& cfg) noexcept {
  return theta > 0.0 ? theta + 1.0 / cfg.ste : theta;
}

double enthalpy_regularized(double theta, const StefanConfig& cfg) noexcept {
  return theta + phi_delta(theta, cfg.delta) / cfg.ste;
}

}  // namespace stefan
