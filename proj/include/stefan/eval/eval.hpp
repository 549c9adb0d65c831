#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "stefan/core/config.hpp"
#include "stefan/fd/crank_nicolson.hpp"
#include "stefan/nn/mlp.hpp"

namespace stefan::eval {

/// ||pred - ref||_2 / ||ref||_2. Throws ZeroReference when ref is all zero
/// and ConfigError on a length mismatch.
double rel_l2(std::span<const double> pred, std::span<const double> ref);

/// Uniform nt x nx lattice over [t0, t1] x [x0, x1], both endpoints included.
struct EvalGrid {
  int nt = 500;
  int nx = 500;
  double t0 = 0.05, t1 = 1.0, x0 = 0.0, x1 = 1.0;

  static EvalGrid over(const StefanConfig& cfg, int nt = 500, int nx = 500);
  double t(int i) const noexcept;
  double x(int j) const noexcept;
  std::size_t size() const noexcept { return static_cast<std::size_t>(nt) * nx; }
};

/// Bilinear interpolation of an FD solution (all snapshots kept) at (t, x),
/// clamped to the solution window.
double sample_bilinear(const fd::FdSolution& sol, double t, double x);

/// Reference values on the lattice, row-major with time as the row index.
std::vector<double> reference_on(const fd::FdSolution& sol, const EvalGrid& grid);

struct EvalResult {
  double rel_l2 = 0.0;
  std::vector<double> abs_error;  ///< row-major, time rows
};

/// Network against a reference lattice. Caches the lattice points and
/// reference values; `t_end` restricts the error to rows with t <= t_end.
class Evaluator {
 public:
  Evaluator(const fd::FdSolution& reference, const EvalGrid& grid);

  double rel_l2(const nn::Mlp& net, double t_end) const;
  double rel_l2(const nn::Mlp& net) const { return rel_l2(net, grid_.t1); }
  EvalResult evaluate(const nn::Mlp& net) const;
  std::vector<double> predict(const nn::Mlp& net) const;

  const EvalGrid& grid() const noexcept { return grid_; }
  const std::vector<double>& reference() const noexcept { return ref_; }

 private:
  EvalGrid grid_;
  std::vector<double> t_, x_, ref_;
};

/// FD reference for evaluation: equal steps with dx = dt = h.
fd::FdSolution reference_solution(const StefanConfig& cfg, double h = 1.0 / 1024);

/// CSV with header "t" plus the x coordinates, one row per lattice time.
void write_lattice_csv(const std::filesystem::path& path, const EvalGrid& grid,
                       std::span<const double> values);

struct SeedOutcome {
  std::uint64_t seed = 0;
  bool ok = false;
  double rel_l2 = 0.0;
  std::string error;
};

struct RunReport {
  double mean = 0.0;
  double stddev = 0.0;  ///< population standard deviation over successful seeds
  double median = 0.0;
  std::size_t succeeded = 0;
  std::vector<SeedOutcome> outcomes;  ///< sorted by seed
};

/// Runs every seed, recording failures (any exception) without stopping.
/// Statistics are taken over successful seeds in seed order, so the report
/// does not depend on the order of `seeds`. Throws ConfigError for an empty
/// seed list.
RunReport ensemble(const std::function<double(std::uint64_t seed)>& run,
                   const std::vector<std::uint64_t>& seeds);

/// Aggregates already computed outcomes the same way.
RunReport aggregate(std::vector<SeedOutcome> outcomes);

}  // namespace stefan::eval
