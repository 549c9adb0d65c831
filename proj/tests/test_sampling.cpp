#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "stefan/core/csv.hpp"
#include "stefan/core/errors.hpp"
#include "stefan/core/exact.hpp"
#include "stefan/sampling/sampling.hpp"

using namespace stefan;
using namespace stefan::sampling;

namespace {

bool stratified(const std::vector<double>& v, double lo, double hi) {
  const std::size_t n = v.size();
  std::vector<int> hits(n, 0);
  for (double p : v) {
    if (!(p >= lo && p <= hi)) return false;
    auto bin = static_cast<std::size_t>((p - lo) / (hi - lo) * static_cast<double>(n));
    bin = std::min(bin, n - 1);
    ++hits[bin];
  }
  return std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; });
}

}  // namespace

TEST_CASE("lhs stratifies every axis") {
  const Interval one[1] = {{0.0, 1.0}};
  const auto single = lhs(1, one, 5);
  REQUIRE(single.size() == 1);
  REQUIRE(single[0].size() == 1);
  CHECK(single[0][0] >= 0.0);
  CHECK(single[0][0] <= 1.0);

  const Interval box[2] = {{0.05, 1.0}, {-2.0, 3.0}};
  for (std::size_t n : {2u, 10u, 37u, 1000u}) {
    for (std::uint64_t seed : {0u, 1u, 99u}) {
      const auto cols = lhs(n, box, seed);
      REQUIRE(cols.size() == 2);
      CHECK(stratified(cols[0], 0.05, 1.0));
      CHECK(stratified(cols[1], -2.0, 3.0));
    }
  }
  const auto ten = lhs(10, one, 3)[0];
  std::vector<int> bins;
  for (double p : ten) bins.push_back(static_cast<int>(p * 10));
  std::sort(bins.begin(), bins.end());
  for (int i = 0; i < 10; ++i) CHECK(bins[i] == i);
}

TEST_CASE("lhs is deterministic per seed") {
  const Interval box[2] = {{0.0, 1.0}, {0.0, 1.0}};
  CHECK(lhs(50, box, 7) == lhs(50, box, 7));
  CHECK(lhs(50, box, 7) != lhs(50, box, 8));
  CHECK_THROWS_AS(lhs(0, box, 1), ConfigError);
  const Interval three[3] = {{0, 1}, {0, 1}, {0, 1}};
  CHECK_THROWS_AS(lhs(4, three, 1), ConfigError);
}

TEST_CASE("sample set families") {
  StefanConfig cfg;
  const auto lam = solve_lambda0(cfg);
  const SampleSet s = build_sample_set(cfg, 1024, 256, 10000, 42);
  CHECK(s.initial_x.size() == 1024);
  CHECK(s.initial_t.size() == 1024);
  CHECK(s.initial_target.size() == 1024);
  CHECK(s.boundary_t.size() == 256);
  CHECK(s.residual_t.size() == 10000);
  CHECK(s.residual_x.size() == 10000);

  for (std::size_t i = 0; i < s.initial_x.size(); ++i) {
    CHECK(s.initial_t[i] == cfg.t0);
    CHECK(s.initial_target[i] == exact_theta(cfg, lam, cfg.t0, s.initial_x[i]));
  }
  CHECK(stratified(s.initial_x, cfg.x0, cfg.x1));
  CHECK(exact_theta(cfg, lam, cfg.t0, 0.0) == cfg.theta_l);

  std::size_t left = 0;
  for (std::size_t i = 0; i < s.boundary_t.size(); ++i) {
    const double t = s.boundary_t[i];
    CHECK(t >= cfg.t0);
    CHECK(t <= cfg.t1);
    if (s.boundary_x[i] == cfg.x0) {
      ++left;
      CHECK(s.boundary_target[i] == cfg.theta_l);
    } else {
      CHECK(s.boundary_x[i] == cfg.x1);
      CHECK(s.boundary_target[i] == exact_theta(cfg, lam, t, cfg.x1));
    }
  }
  CHECK(left == 128);
  CHECK(stratified(s.residual_t, cfg.t0, cfg.t1));
  CHECK(stratified(s.residual_x, cfg.x0, cfg.x1));
  for (double v : s.residual_t) CHECK(std::isfinite(v));

  const SampleSet again = build_sample_set(cfg, 1024, 256, 10000, 42);
  CHECK(again.residual_t == s.residual_t);
  CHECK(again.boundary_t == s.boundary_t);
  CHECK(build_sample_set(cfg, 1024, 256, 10000, 43).residual_t != s.residual_t);
  CHECK(build_sample_set(cfg, 1, 1, 1, 0).boundary_x == std::vector<double>{cfg.x1});
  CHECK_THROWS_AS(build_sample_set(cfg, 0, 4, 4, 0), ConfigError);
}

TEST_CASE("curriculum schedule") {
  StefanConfig cfg;
  const CurriculumSchedule s = build_curriculum(cfg);
  REQUIRE(s.stages.size() == 19);
  CHECK(s.stages.front().n_residual == 1000);
  CHECK(s.stages.front().n_iterations == 100000);
  CHECK(s.stages.back().n_residual == 10000);
  CHECK(s.stages.back().t_end == cfg.t1);
  for (std::size_t k = 0; k < s.stages.size(); ++k) {
    CHECK(s.stages[k].k == static_cast<int>(k + 1));
    CHECK(s.stages[k].t_end == doctest::Approx(cfg.t0 + 0.05 * (k + 1)).epsilon(1e-14));
    CHECK(s.stages[k].n_residual == 1000 + 500 * k);
    CHECK(s.stages[k].n_iterations == std::lround(1e8 / s.stages[k].n_residual));
  }
  const CurriculumSchedule small = build_curriculum(cfg, 0.05, 1000, 500, 1e6);
  CHECK(small.stages[0].n_iterations == 1000);
  CHECK(small.stages[18].n_iterations == 100);
  CHECK(small.stages[2].n_iterations == 500);
  CHECK_THROWS_AS(build_curriculum(cfg, 0.07), NonIntegerStages);
  CHECK_THROWS_AS(build_curriculum(cfg, 0.07), ConfigError);
}

TEST_CASE("curriculum points are nested and slab-stratified") {
  StefanConfig cfg;
  const CurriculumSchedule s = build_curriculum(cfg);
  const CurriculumPoints p = curriculum_residual_points(cfg, s, 9);
  REQUIRE(p.t.size() == 10000);
  std::size_t begin = 0;
  double t_prev = cfg.t0;
  for (const auto& st : s.stages) {
    std::vector<double> slab_t(p.t.begin() + begin, p.t.begin() + st.n_residual);
    std::vector<double> slab_x(p.x.begin() + begin, p.x.begin() + st.n_residual);
    CHECK(stratified(slab_t, t_prev, st.t_end));
    CHECK(stratified(slab_x, cfg.x0, cfg.x1));
    for (std::size_t i = 0; i < st.n_residual; ++i) CHECK(p.t[i] <= st.t_end);
    begin = st.n_residual;
    t_prev = st.t_end;
  }
  const CurriculumPoints q = curriculum_residual_points(cfg, s, 9);
  CHECK(q.t == p.t);
  CHECK(q.x == p.x);
}

TEST_CASE("sample dump") {
  StefanConfig cfg;
  const SampleSet s = build_sample_set(cfg, 8, 4, 16, 1);
  const auto dir = std::filesystem::temp_directory_path() / "stefan_samples_test";
  std::filesystem::remove_all(dir);
  write_samples(dir, s);
  const CsvTable init = read_csv(dir / "initial.csv");
  CHECK(init.header == std::vector<std::string>{"t", "x", "target"});
  REQUIRE(init.rows.size() == 8);
  CHECK(init.rows[3][1] == s.initial_x[3]);
  CHECK(init.rows[3][2] == s.initial_target[3]);
  CHECK(read_csv(dir / "boundary.csv").rows.size() == 4);
  const CsvTable res = read_csv(dir / "residual.csv");
  CHECK(res.header == std::vector<std::string>{"t", "x"});
  CHECK(res.rows.size() == 16);
  std::filesystem::remove_all(dir);
}
