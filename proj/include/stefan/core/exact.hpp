#pragma once

#include <span>

#include "stefan/core/config.hpp"

namespace stefan {

/// Self-similarity constant of the semi-infinite solution, with the value
/// of the transcendental equation at the returned root.
struct InterfaceConstant {
  double lambda0 = 0.0;
  double residual = 0.0;
};

/// Left-hand side of the transcendental equation for lambda0:
///   l - Ste / sqrt(pi) * exp(-l^2) * (theta_r / erfc(l) + theta_l / erf(l)).
double lambda0_equation(double lambda0, const StefanConfig& cfg);

/// Bisection on (1e-8, 5] followed by a Newton polish. Throws NoRootBracket
/// when the equation keeps one sign on the bracket, ConfigError on an
/// invalid configuration.
InterfaceConstant solve_lambda0(const StefanConfig& cfg);

/// Interface position 2 * lambda0 * sqrt(t * Fo).
double interface_position(const StefanConfig& cfg, const InterfaceConstant& lam,
                          double t);

/// Interface velocity d/dt of interface_position.
double interface_velocity(const StefanConfig& cfg, const InterfaceConstant& lam,
                          double t);

/// Two-branch erf/erfc solution, liquid branch for x <= interface_position.
double exact_theta(const StefanConfig& cfg, const InterfaceConstant& lam,
                   double t, double x);

/// Analytic d theta / dx of the liquid (left) branch, evaluated at any x.
double exact_theta_dx_left(const StefanConfig& cfg, const InterfaceConstant& lam,
                           double t, double x);

/// Analytic d theta / dx of the solid (right) branch, evaluated at any x.
double exact_theta_dx_right(const StefanConfig& cfg,
                            const InterfaceConstant& lam, double t, double x);

/// Jump condition  theta_x(right) - theta_x(left) - lambda'(t) / (Fo Ste)
/// at x = lambda(t). Vanishes when lambda0 solves its equation.
double stefan_condition_residual(const StefanConfig& cfg,
                                 const InterfaceConstant& lam, double t);

/// Zero crossing of a sampled profile by linear interpolation between the
/// first pair of nodes that bracket zero (scanning from the left). Returns
/// the first node when none is found on a non-positive profile, the last
/// node on a positive one.
double zero_crossing(std::span<const double> x, std::span<const double> theta);

}  // namespace stefan
