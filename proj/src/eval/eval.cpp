#include "stefan/eval/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stefan/core/csv.hpp"
#include "stefan/core/errors.hpp"
#include "stefan/nn/batch.hpp"

namespace stefan::eval {

double rel_l2(std::span<const double> pred, std::span<const double> ref) {
  if (pred.size() != ref.size()) throw ConfigError("fields differ in size");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double d = pred[i] - ref[i];
    num += d * d;
    den += ref[i] * ref[i];
  }
  if (den == 0.0) throw ZeroReference("reference field is identically zero");
  return std::sqrt(num / den);
}

EvalGrid EvalGrid::over(const StefanConfig& cfg, int nt, int nx) {
  if (nt < 2 || nx < 2) throw ConfigError("evaluation lattice needs at least 2 x 2 points");
  return {nt, nx, cfg.t0, cfg.t1, cfg.x0, cfg.x1};
}

double EvalGrid::t(int i) const noexcept {
  return i == nt - 1 ? t1 : t0 + (t1 - t0) * i / (nt - 1);
}

double EvalGrid::x(int j) const noexcept {
  return j == nx - 1 ? x1 : x0 + (x1 - x0) * j / (nx - 1);
}

double sample_bilinear(const fd::FdSolution& sol, double t, double x) {
  const fd::Grid& g = sol.grid;
  if (sol.snapshots.size() != static_cast<std::size_t>(g.nt + 1)) {
    throw ConfigError("bilinear sampling needs every FD snapshot");
  }
  const double pt = std::clamp((t - g.t0) / g.dt, 0.0, static_cast<double>(g.nt));
  const double px = std::clamp((x - g.x0) / g.dx, 0.0, static_cast<double>(g.nx - 1));
  const int n = std::min(static_cast<int>(pt), g.nt - 1);
  const int i = std::min(static_cast<int>(px), g.nx - 2);
  const double wt = pt - n;
  const double wx = px - i;
  const auto& lo = sol.snapshots[n].values;
  const auto& hi = sol.snapshots[n + 1].values;
  const double a = (1.0 - wx) * lo[i] + wx * lo[i + 1];
  const double b = (1.0 - wx) * hi[i] + wx * hi[i + 1];
  return (1.0 - wt) * a + wt * b;
}

std::vector<double> reference_on(const fd::FdSolution& sol, const EvalGrid& grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (int i = 0; i < grid.nt; ++i) {
    for (int j = 0; j < grid.nx; ++j) out.push_back(sample_bilinear(sol, grid.t(i), grid.x(j)));
  }
  return out;
}

Evaluator::Evaluator(const fd::FdSolution& reference, const EvalGrid& grid)
    : grid_(grid), ref_(reference_on(reference, grid)) {
  t_.reserve(grid.size());
  x_.reserve(grid.size());
  for (int i = 0; i < grid.nt; ++i) {
    for (int j = 0; j < grid.nx; ++j) {
      t_.push_back(grid.t(i));
      x_.push_back(grid.x(j));
    }
  }
}

std::vector<double> Evaluator::predict(const nn::Mlp& net) const {
  std::vector<double> out(t_.size());
  nn::BatchEngine engine(256);
  engine.values(net, t_, x_, out);
  return out;
}

double Evaluator::rel_l2(const nn::Mlp& net, double t_end) const {
  int rows = 0;
  while (rows < grid_.nt && grid_.t(rows) <= t_end + 1e-12) ++rows;
  if (rows == 0) throw ConfigError("evaluation window holds no lattice rows");
  const std::size_t n = static_cast<std::size_t>(rows) * grid_.nx;
  std::vector<double> pred(n);
  nn::BatchEngine engine(256);
  engine.values(net, std::span(t_).first(n), std::span(x_).first(n), pred);
  return eval::rel_l2(pred, std::span(ref_).first(n));
}

EvalResult Evaluator::evaluate(const nn::Mlp& net) const {
  const std::vector<double> pred = predict(net);
  EvalResult r;
  r.rel_l2 = eval::rel_l2(pred, ref_);
  r.abs_error.resize(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) r.abs_error[i] = std::abs(pred[i] - ref_[i]);
  return r;
}

fd::FdSolution reference_solution(const StefanConfig& cfg, double h) {
  return fd::solve(cfg, fd::Grid::equal_steps(cfg, h));
}

void write_lattice_csv(const std::filesystem::path& path, const EvalGrid& grid,
                       std::span<const double> values) {
  if (values.size() != grid.size()) throw ConfigError("lattice field has the wrong size");
  CsvTable table;
  table.header.push_back("t");
  for (int j = 0; j < grid.nx; ++j) table.header.push_back(format_double(grid.x(j)));
  for (int i = 0; i < grid.nt; ++i) {
    std::vector<double> row;
    row.reserve(grid.nx + 1);
    row.push_back(grid.t(i));
    const auto first = values.begin() + static_cast<std::ptrdiff_t>(i) * grid.nx;
    row.insert(row.end(), first, first + grid.nx);
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

RunReport aggregate(std::vector<SeedOutcome> outcomes) {
  std::sort(outcomes.begin(), outcomes.end(),
            [](const SeedOutcome& a, const SeedOutcome& b) { return a.seed < b.seed; });
  RunReport rep;
  std::vector<double> vals;
  for (const auto& o : outcomes) {
    if (o.ok) vals.push_back(o.rel_l2);
  }
  rep.succeeded = vals.size();
  if (!vals.empty()) {
    double sum = 0.0;
    for (double v : vals) sum += v;
    rep.mean = sum / static_cast<double>(vals.size());
    double sq = 0.0;
    for (double v : vals) sq += (v - rep.mean) * (v - rep.mean);
    rep.stddev = std::sqrt(sq / static_cast<double>(vals.size()));
    std::vector<double> sorted = vals;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    rep.median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  } else {
    rep.mean = rep.stddev = rep.median = std::numeric_limits<double>::quiet_NaN();
  }
  rep.outcomes = std::move(outcomes);
  return rep;
}

RunReport ensemble(const std::function<double(std::uint64_t)>& run,
                   const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw ConfigError("ensemble needs at least one seed");
  std::vector<SeedOutcome> outcomes;
  for (std::uint64_t s : seeds) {
    SeedOutcome o;
    o.seed = s;
    try {
      o.rel_l2 = run(s);
      o.ok = true;
    } catch (const std::exception& e) {
      o.error = e.what();
    }
    outcomes.push_back(std::move(o));
  }
  return aggregate(std::move(outcomes));
}

}  // namespace stefan::eval
