#pragma once

#include "stefan/core/config.hpp"

namespace stefan {

/// Smoothed liquid fraction 0.5 * (1 + tanh(theta / delta)).
double phi_delta(double theta, double delta) noexcept;

/// First derivative, 1 / (2 delta) * sech^2(theta / delta).
double phi_delta_prime(double theta, double delta) noexcept;

/// Second derivative, -1 / delta^2 * sech^2(theta / delta) * tanh(theta / delta).
double phi_delta_second(double theta, double delta) noexcept;

/// r(theta) = Fo / (1 + phi'_delta(theta) / Ste). Lies in (0, Fo], minimal at 0.
double effective_diffusivity(double theta, const StefanConfig& cfg) noexcept;

/// d r / d theta, needed by the full-Newton Jacobian.
double effective_diffusivity_prime(double theta, const StefanConfig& cfg) noexcept;

/// Sharp dimensionless enthalpy: theta, plus 1/Ste in the liquid (theta > 0).
double enthalpy(double theta, const StefanConfig& cfg) noexcept;

/// Regularized enthalpy theta + phi_delta(theta) / Ste.
double enthalpy_regularized(double theta, const StefanConfig& cfg) noexcept;

}  // namespace stefan
