#include "stefan/fd/newton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "stefan/core/errors.hpp"

namespace stefan::fd {

void solve_tridiagonal(const Tridiagonal& a, std::span<double> rhs, double pivot_floor) {
  const std::size_t n = a.size();
  if (n == 0) return;
  std::vector<double> c(n, 0.0);  // modified upper diagonal
  double pivot = a.diag[0];
  if (std::abs(pivot) < pivot_floor) throw SingularJacobian("zero pivot in row 0");
  c[0] = n > 1 ? a.upper[0] / pivot : 0.0;
  rhs[0] /= pivot;
  for (std::size_t i = 1; i < n; ++i) {
    pivot = a.diag[i] - a.lower[i] * c[i - 1];
    if (std::abs(pivot) < pivot_floor) {
      throw SingularJacobian("zero pivot in row " + std::to_string(i));
    }
    c[i] = i + 1 < n ? a.upper[i] / pivot : 0.0;
    rhs[i] = (rhs[i] - a.lower[i] * rhs[i - 1]) / pivot;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
}

namespace {

double max_norm(std::span<const double> v) {
  double m = 0.0;
  for (double e : v) {
    if (!std::isfinite(e)) return std::numeric_limits<double>::infinity();
    m = std::max(m, std::abs(e));
  }
  return m;
}

}  // namespace

NewtonResult newton_solve(const ResidualFn& residual, const JacobianFn& jacobian,
                          std::vector<double> guess, const NewtonOptions& opts) {
  NewtonResult out;
  out.x = std::move(guess);
  const std::size_t n = out.x.size();
  std::vector<double> f(n);
  Tridiagonal jac(n);

  residual(out.x, f);
  out.residual_norm = max_norm(f);
  while (out.residual_norm > opts.tolerance) {
    if (out.iterations >= opts.max_iterations || !std::isfinite(out.residual_norm)) {
      throw NewtonDiverged("Newton residual " + std::to_string(out.residual_norm) +
                           " after " + std::to_string(out.iterations) + " iterations");
    }
    jacobian(out.x, jac);
    solve_tridiagonal(jac, f);
    for (std::size_t i = 0; i < n; ++i) out.x[i] -= f[i];
    ++out.iterations;
    residual(out.x, f);
    out.residual_norm = max_norm(f);
  }
  return out;
}

}  // namespace stefan::fd
