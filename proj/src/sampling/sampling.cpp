#include "stefan/sampling/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "stefan/core/csv.hpp"
#include "stefan/core/errors.hpp"
#include "stefan/core/exact.hpp"

namespace stefan::sampling {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  // splitmix64 finalizer over a mixed pair
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<std::vector<double>> lhs(std::size_t n, std::span<const Interval> bounds,
                                     std::uint64_t seed) {
  if (n == 0) throw ConfigError("lhs needs at least one point");
  if (bounds.size() != 1 && bounds.size() != 2) throw ConfigError("lhs supports 1 or 2 dimensions");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<double>> cols;
  std::vector<std::size_t> perm(n);
  for (const Interval& b : bounds) {
    if (!(b.hi >= b.lo)) throw ConfigError("lhs interval is reversed");
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const double width = (b.hi - b.lo) / static_cast<double>(n);
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = b.lo + (static_cast<double>(perm[i]) + unit(rng)) * width;
      col[i] = std::clamp(v, b.lo, b.hi);
    }
    cols.push_back(std::move(col));
  }
  return cols;
}

SampleSet build_sample_set(const StefanConfig& cfg, std::size_t n0, std::size_t nb,
                           std::size_t nr, std::uint64_t seed) {
  cfg.validate();
  if (n0 == 0 || nb == 0 || nr == 0) throw ConfigError("sample counts must be positive");
  const InterfaceConstant lam = solve_lambda0(cfg);
  SampleSet s;

  const Interval space{cfg.x0, cfg.x1};
  const Interval time{cfg.t0, cfg.t1};

  s.initial_x = lhs(n0, std::span(&space, 1), derive_seed(seed, 0))[0];
  s.initial_t.assign(n0, cfg.t0);
  for (double x : s.initial_x) s.initial_target.push_back(exact_theta(cfg, lam, cfg.t0, x));

  const std::size_t left = nb / 2;
  const auto tl =
      left > 0 ? lhs(left, std::span(&time, 1), derive_seed(seed, 1))[0] : std::vector<double>{};
  const auto tr = lhs(nb - left, std::span(&time, 1), derive_seed(seed, 2))[0];
  for (double t : tl) {
    s.boundary_t.push_back(t);
    s.boundary_x.push_back(cfg.x0);
    s.boundary_target.push_back(cfg.theta_l);
  }
  for (double t : tr) {
    s.boundary_t.push_back(t);
    s.boundary_x.push_back(cfg.x1);
    s.boundary_target.push_back(exact_theta(cfg, lam, t, cfg.x1));
  }

  const Interval box[2] = {time, space};
  auto cols = lhs(nr, box, derive_seed(seed, 3));
  s.residual_t = std::move(cols[0]);
  s.residual_x = std::move(cols[1]);
  return s;
}

CurriculumSchedule build_curriculum(const StefanConfig& cfg, double dt_seq, std::size_t base_nr,
                                    std::size_t incr, double budget) {
  cfg.validate();
  if (!(dt_seq > 0.0)) throw ConfigError("dt_seq must be positive");
  if (base_nr == 0) throw ConfigError("base_nr must be positive");
  if (!(budget > 0.0)) throw ConfigError("budget must be positive");
  const double ratio = (cfg.t1 - cfg.t0) / dt_seq;
  const long count = std::lround(ratio);
  if (count < 1 || std::abs(ratio - static_cast<double>(count)) > 1e-9 * ratio) {
    throw NonIntegerStages("time window is not a whole number of dt_seq slabs");
  }
  CurriculumSchedule sched;
  sched.dt_seq = dt_seq;
  for (long k = 1; k <= count; ++k) {
    CurriculumStage st;
    st.k = static_cast<int>(k);
    st.t_end = k == count ? cfg.t1 : cfg.t0 + static_cast<double>(k) * dt_seq;
    st.n_residual = base_nr + static_cast<std::size_t>(k - 1) * incr;
    st.n_iterations = std::lround(budget / static_cast<double>(st.n_residual));
    sched.stages.push_back(st);
  }
  return sched;
}

CurriculumPoints curriculum_residual_points(const StefanConfig& cfg,
                                            const CurriculumSchedule& schedule,
                                            std::uint64_t seed) {
  CurriculumPoints pts;
  double t_prev = cfg.t0;
  std::size_t have = 0;
  for (const CurriculumStage& st : schedule.stages) {
    const std::size_t fresh = st.n_residual - have;
    if (fresh > 0) {
      const Interval box[2] = {{t_prev, st.t_end}, {cfg.x0, cfg.x1}};
      const auto cols = lhs(fresh, box, derive_seed(seed, 100 + static_cast<std::uint64_t>(st.k)));
      pts.t.insert(pts.t.end(), cols[0].begin(), cols[0].end());
      pts.x.insert(pts.x.end(), cols[1].begin(), cols[1].end());
    }
    have = st.n_residual;
    t_prev = st.t_end;
  }
  return pts;
}

namespace {

void write_family(const std::filesystem::path& path, const std::vector<double>& t,
                  const std::vector<double>& x, const std::vector<double>* target) {
  CsvTable table;
  table.header = {"t", "x"};
  if (target) table.header.push_back("target");
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::vector<double> row = {t[i], x[i]};
    if (target) row.push_back((*target)[i]);
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

}  // namespace

void write_samples(const std::filesystem::path& dir, const SampleSet& set) {
  std::filesystem::create_directories(dir);
  write_family(dir / "initial.csv", set.initial_t, set.initial_x, &set.initial_target);
  write_family(dir / "boundary.csv", set.boundary_t, set.boundary_x, &set.boundary_target);
  write_family(dir / "residual.csv", set.residual_t, set.residual_x, nullptr);
}

}  // namespace stefan::sampling
