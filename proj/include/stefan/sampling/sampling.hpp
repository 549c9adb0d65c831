#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "stefan/core/config.hpp"

namespace stefan::sampling {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Latin hypercube sample of `n` points, one column per interval. Each axis
/// is cut into n equal bins holding exactly one point, placed uniformly
/// within its bin; axes are permuted independently. Throws ConfigError for
/// n == 0 or a dimension other than 1 or 2.
std::vector<std::vector<double>> lhs(std::size_t n, std::span<const Interval> bounds,
                                     std::uint64_t seed);

/// Training points. Initial points sit at t = t0; boundary points on x0 and
/// x1; residual points fill the space-time window.
struct SampleSet {
  std::vector<double> initial_t, initial_x, initial_target;
  std::vector<double> boundary_t, boundary_x, boundary_target;
  std::vector<double> residual_t, residual_x;
};

/// Boundary points go nb/2 to x0 (target theta_l) and the rest to x1
/// (exact-solution target), each LHS in t. Throws ConfigError on a zero count.
SampleSet build_sample_set(const StefanConfig& cfg, std::size_t n0, std::size_t nb,
                           std::size_t nr, std::uint64_t seed);

struct CurriculumStage {
  int k = 0;  ///< 1-based
  double t_end = 0.0;
  std::size_t n_residual = 0;
  long n_iterations = 0;
};

struct CurriculumSchedule {
  double dt_seq = 0.05;
  std::vector<CurriculumStage> stages;
};

/// Stage k covers [t0, t0 + k dt_seq] with base_nr + (k-1) incr residual
/// points and round(budget / n_residual) iterations. Throws NonIntegerStages
/// when dt_seq does not divide the time window.
CurriculumSchedule build_curriculum(const StefanConfig& cfg, double dt_seq = 0.05,
                                    std::size_t base_nr = 1000, std::size_t incr = 500,
                                    double budget = 1e8);

/// Nested residual points for a schedule: stage k uses the first
/// stages[k-1].n_residual entries. Points added at stage k are LHS over the
/// slab [t_end(k-1), t_end(k)] x [x0, x1].
struct CurriculumPoints {
  std::vector<double> t, x;
};
CurriculumPoints curriculum_residual_points(const StefanConfig& cfg,
                                            const CurriculumSchedule& schedule,
                                            std::uint64_t seed);

/// Writes initial.csv, boundary.csv (t,x,target) and residual.csv (t,x).
void write_samples(const std::filesystem::path& dir, const SampleSet& set);

/// Derives an independent stream seed from (seed, stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

}  // namespace stefan::sampling
