#include "stefan/core/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "stefan/core/errors.hpp"
#include "stefan/core/special_functions.hpp"

namespace stefan {

namespace {

constexpr double kLambdaLo = 1e-8;
constexpr double kLambdaHi = 5.0;

double lambda0_equation_prime(double l, const StefanConfig& cfg) {
  const double e = std::exp(-l * l);
  const double ef = erf(l);
  const double ec = erfc(l);
  const double g = cfg.theta_r / ec + cfg.theta_l / ef;
  const double two_over_sqrt_pi = 2.0 * std::numbers::inv_sqrtpi;
  const double dg = two_over_sqrt_pi * e *
                    (cfg.theta_r / (ec * ec) - cfg.theta_l / (ef * ef));
  return 1.0 - cfg.ste * std::numbers::inv_sqrtpi * (-2.0 * l * e * g + e * dg);
}

// Similarity variable x / (2 sqrt(t Fo)).
double similarity(const StefanConfig& cfg, double t, double x) {
  return x / (2.0 * std::sqrt(t * cfg.fo));
}

}  // namespace

double lambda0_equation(double l, const StefanConfig& cfg) {
  return l - cfg.ste * std::numbers::inv_sqrtpi * std::exp(-l * l) *
                 (cfg.theta_r / erfc(l) + cfg.theta_l / erf(l));
}

InterfaceConstant solve_lambda0(const StefanConfig& cfg) {
  cfg.validate();
  double lo = kLambdaLo;
  double hi = kLambdaHi;
  double f_lo = lambda0_equation(lo, cfg);
  const double f_hi = lambda0_equation(hi, cfg);
  if (!(f_lo < 0.0 && f_hi > 0.0)) {
    throw NoRootBracket("lambda0 equation does not change sign on (1e-8, 5]");
  }
  for (int i = 0; i < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = lambda0_equation(mid, cfg);
    if (f_mid == 0.0) {
      lo = hi = mid;
      break;
    }
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }

  InterfaceConstant out;
  out.lambda0 = 0.5 * (lo + hi);
  out.residual = lambda0_equation(out.lambda0, cfg);
  // Newton polish; keep a step only if it lowers the residual.
  for (int i = 0; i < 4 && out.residual != 0.0; ++i) {
    const double step = out.residual / lambda0_equation_prime(out.lambda0, cfg);
    const double cand = out.lambda0 - step;
    if (!(cand > 0.0)) break;
    const double r = lambda0_equation(cand, cfg);
    if (!(std::abs(r) < std::abs(out.residual))) break;
    out.lambda0 = cand;
    out.residual = r;
  }
  return out;
}

double interface_position(const StefanConfig& cfg, const InterfaceConstant& lam,
                          double t) {
  return 2.0 * lam.lambda0 * std::sqrt(t * cfg.fo);
}

double interface_velocity(const StefanConfig& cfg, const InterfaceConstant& lam,
                          double t) {
  return lam.lambda0 * std::sqrt(cfg.fo / t);
}

double exact_theta(const StefanConfig& cfg, const InterfaceConstant& lam,
                   double t, double x) {
  const double eta = similarity(cfg, t, x);
  if (x <= interface_position(cfg, lam, t)) {
    return cfg.theta_l * (1.0 - erf(eta) / erf(lam.lambda0));
  }
  return cfg.theta_r * (1.0 - erfc(eta) / erfc(lam.lambda0));
}

double exact_theta_dx_left(const StefanConfig& cfg, const InterfaceConstant& lam,
                           double t, double x) {
  const double eta = similarity(cfg, t, x);
  const double deta_dx = 0.5 / std::sqrt(t * cfg.fo);
  return -cfg.theta_l / erf(lam.lambda0) * 2.0 * std::numbers::inv_sqrtpi *
         std::exp(-eta * eta) * deta_dx;
}

double exact_theta_dx_right(const StefanConfig& cfg,
                            const InterfaceConstant& lam, double t, double x) {
  const double eta = similarity(cfg, t, x);
  const double deta_dx = 0.5 / std::sqrt(t * cfg.fo);
  return cfg.theta_r / erfc(lam.lambda0) * 2.0 * std::numbers::inv_sqrtpi *
         std::exp(-eta * eta) * deta_dx;
}

double stefan_condition_residual(const StefanConfig& cfg,
                                 const InterfaceConstant& lam, double t) {
  const double s = interface_position(cfg, lam, t);
  return exact_theta_dx_right(cfg, lam, t, s) -
         exact_theta_dx_left(cfg, lam, t, s) -
         interface_velocity(cfg, lam, t) / (cfg.fo * cfg.ste);
}

double zero_crossing(std::span<const double> x, std::span<const double> theta) {
  const std::size_t n = std::min(x.size(), theta.size());
  if (n == 0) return 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = theta[i];
    const double b = theta[i + 1];
    if (a > 0.0 && b <= 0.0) {
      return x[i] + a / (a - b) * (x[i + 1] - x[i]);
    }
  }
  return theta[0] <= 0.0 ? x[0] : x[n - 1];
}

}  // namespace stefan
