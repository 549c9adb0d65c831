#pragma once

#include <functional>
#include <span>
#include <vector>

namespace stefan::fd {

/// Tridiagonal matrix stored by diagonals. `lower[i]` couples row i to
/// column i-1 (lower[0] unused), `upper[i]` row i to column i+1
/// (upper[n-1] unused).
struct Tridiagonal {
  std::vector<double> lower, diag, upper;

  explicit Tridiagonal(std::size_t n = 0) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}
  std::size_t size() const noexcept { return diag.size(); }
};

/// Solves `a * x = rhs` in place by Thomas elimination without pivoting.
/// Throws SingularJacobian when a pivot magnitude drops below `pivot_floor`.
void solve_tridiagonal(const Tridiagonal& a, std::span<double> rhs,
                       double pivot_floor = 1e-14);

struct NewtonOptions {
  double tolerance = 1e-10;  ///< max-norm of the residual
  int max_iterations = 50;
};

struct NewtonResult {
  std::vector<double> x;
  int iterations = 0;
  double residual_norm = 0.0;
};

using ResidualFn = std::function<void(std::span<const double> x, std::span<double> f)>;
using JacobianFn = std::function<void(std::span<const double> x, Tridiagonal& jac)>;

/// Newton-Raphson for F(x) = 0 with a tridiagonal Jacobian, full steps.
/// Stops as soon as the residual max-norm is within tolerance (zero
/// iterations for a root).
/// Throws NewtonDiverged past max_iterations or on a non-finite residual.
NewtonResult newton_solve(const ResidualFn& residual, const JacobianFn& jacobian,
                          std::vector<double> guess, const NewtonOptions& opts = {});

}  // namespace stefan::fd
