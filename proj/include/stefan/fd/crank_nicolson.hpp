#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "stefan/core/config.hpp"
#include "stefan/fd/newton.hpp"

namespace stefan::fd {

/// Uniform space-time lattice covering [x0, x1] x [t0, t1] exactly.
struct Grid {
  int nx = 0;  ///< node count including both boundary nodes
  int nt = 0;  ///< number of time steps
  double dx = 0.0;
  double dt = 0.0;
  double x0 = 0.0;
  double t0 = 0.0;

  /// nx nodes and nt steps over the config window.
  static Grid from_counts(const StefanConfig& cfg, int nx, int nt);

  /// Equal-step mode: dx = h exactly; the step count is the nearest integer
  /// to (t1 - t0) / h, so dt differs from h only when h does not divide the
  /// time window.
  static Grid equal_steps(const StefanConfig& cfg, double h);

  double x(int i) const noexcept { return x0 + i * dx; }
  double t(int n) const noexcept { return t0 + n * dt; }
  std::vector<double> nodes() const;
};

/// Temperature at every grid node at one instant.
struct Field1D {
  std::vector<double> values;
  double time = 0.0;
};

struct StepStats {
  int newton_iterations = 0;
  double residual_norm = 0.0;
};

/// One Crank-Nicolson step of  theta_t = r(theta) theta_xx  with Dirichlet
/// values imposed at both ends. The nonlinear system is solved by full
/// Newton (the Jacobian includes dr/dtheta), starting from `guess` when it
/// has one value per node and from `prev` otherwise.
Field1D cn_step(const Field1D& prev, const Grid& grid, const StefanConfig& cfg,
                double bc_left, double bc_right, const NewtonOptions& opts = {},
                StepStats* stats = nullptr, std::span<const double> guess = {});

struct SolveOptions {
  NewtonOptions newton;
  /// Keep every snapshot; when false only the initial and final ones are kept.
  bool keep_history = true;
};

struct FdSolution {
  Grid grid;
  std::vector<Field1D> snapshots;
  int max_newton_iterations = 0;

  const Field1D& final() const { return snapshots.back(); }
};

/// Marches from the exact profile at t0 with the left wall at theta_l and
/// the right wall following the exact solution. Each Newton solve starts
/// from the linear extrapolation 2 theta^n - theta^(n-1), with one retry
/// from theta^n. NewtonDiverged carries the failing step index.
FdSolution solve(const StefanConfig& cfg, const Grid& grid, const SolveOptions& opts = {});

struct ConvergenceRow {
  double h = 0.0;
  double rel_l2 = 0.0;
};

/// Relative L2 distance over the whole space-time lattice of each coarse
/// solve (dx = h) against a reference solve with dx = h_min, taken on the
/// coarse nodes with the reference interpolated linearly in time. Each h
/// must be an integer multiple of h_min.
std::vector<ConvergenceRow> convergence_study(const StefanConfig& cfg,
                                              const std::vector<double>& steps,
                                              double h_min,
                                              const NewtonOptions& opts = {});

/// Least-squares slope of log(rel_l2) against log(h).
double loglog_slope(const std::vector<ConvergenceRow>& rows);

/// Writes `<dir>/field.csv` (header "t" plus node coordinates, one row per
/// snapshot) and `<dir>/grid.json` with grid and model metadata.
void write_solution(const std::filesystem::path& dir, const FdSolution& sol,
                    const StefanConfig& cfg);

/// Reads back what write_solution produced.
FdSolution read_solution(const std::filesystem::path& dir);

}  // namespace stefan::fd
