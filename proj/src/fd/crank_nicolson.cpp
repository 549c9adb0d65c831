#include "stefan/fd/crank_nicolson.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "stefan/core/csv.hpp"
#include "stefan/core/errors.hpp"
#include "stefan/core/exact.hpp"
#include "stefan/core/regularization.hpp"

namespace stefan::fd {

Grid Grid::from_counts(const StefanConfig& cfg, int nx, int nt) {
  if (nx < 3) throw ConfigError("grid needs at least 3 nodes");
  if (nt < 1) throw ConfigError("grid needs at least 1 time step");
  Grid g;
  g.nx = nx;
  g.nt = nt;
  g.x0 = cfg.x0;
  g.t0 = cfg.t0;
  g.dx = (cfg.x1 - cfg.x0) / (nx - 1);
  g.dt = (cfg.t1 - cfg.t0) / nt;
  return g;
}

Grid Grid::equal_steps(const StefanConfig& cfg, double h) {
  if (!(h > 0.0)) throw ConfigError("step size must be positive");
  const double cells = (cfg.x1 - cfg.x0) / h;
  const long nx_cells = std::lround(cells);
  if (std::abs(cells - static_cast<double>(nx_cells)) > 1e-9 * cells) {
    throw ConfigError("h must divide the spatial domain");
  }
  const long steps = std::max(1L, std::lround((cfg.t1 - cfg.t0) / h));
  return from_counts(cfg, static_cast<int>(nx_cells + 1), static_cast<int>(steps));
}

std::vector<double> Grid::nodes() const {
  std::vector<double> xs(nx);
  for (int i = 0; i < nx; ++i) xs[i] = x(i);
  return xs;
}

Field1D cn_step(const Field1D& prev, const Grid& grid, const StefanConfig& cfg,
                double bc_left, double bc_right, const NewtonOptions& opts,
                StepStats* stats, std::span<const double> guess) {
  const int n = grid.nx;
  const double inv_dx2 = 1.0 / (grid.dx * grid.dx);
  const double half_dt = 0.5 * grid.dt;

  // Explicit half of the scheme, fixed during the Newton solve.
  std::vector<double> explicit_part(n, 0.0);
  for (int i = 1; i + 1 < n; ++i) {
    const auto& p = prev.values;
    const double curv = (p[i + 1] - 2.0 * p[i] + p[i - 1]) * inv_dx2;
    explicit_part[i] = p[i] + half_dt * effective_diffusivity(p[i], cfg) * curv;
  }

  auto residual = [&](std::span<const double> u, std::span<double> f) {
    f[0] = u[0] - bc_left;
    f[n - 1] = u[n - 1] - bc_right;
    for (int i = 1; i + 1 < n; ++i) {
      const double curv = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv_dx2;
      f[i] = u[i] - half_dt * effective_diffusivity(u[i], cfg) * curv - explicit_part[i];
    }
  };
  auto jacobian = [&](std::span<const double> u, Tridiagonal& jac) {
    jac.diag[0] = 1.0;
    jac.upper[0] = 0.0;
    jac.diag[n - 1] = 1.0;
    jac.lower[n - 1] = 0.0;
    for (int i = 1; i + 1 < n; ++i) {
      const double r = effective_diffusivity(u[i], cfg);
      const double dr = effective_diffusivity_prime(u[i], cfg);
      const double curv = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv_dx2;
      jac.lower[i] = -half_dt * r * inv_dx2;
      jac.upper[i] = -half_dt * r * inv_dx2;
      jac.diag[i] = 1.0 - half_dt * (dr * curv - 2.0 * r * inv_dx2);
    }
  };

  std::vector<double> start = prev.values;
  if (guess.size() == start.size()) std::copy(guess.begin(), guess.end(), start.begin());
  start.front() = bc_left;
  start.back() = bc_right;
  NewtonResult res = newton_solve(residual, jacobian, std::move(start), opts);
  if (stats) {
    stats->newton_iterations = res.iterations;
    stats->residual_norm = res.residual_norm;
  }
  // Dirichlet values exactly, not merely to tolerance.
  res.x.front() = bc_left;
  res.x.back() = bc_right;
  return Field1D{std::move(res.x), prev.time + grid.dt};
}

FdSolution solve(const StefanConfig& cfg, const Grid& grid, const SolveOptions& opts) {
  cfg.validate();
  const InterfaceConstant lam = solve_lambda0(cfg);
  const double x_right = grid.x(grid.nx - 1);

  FdSolution sol;
  sol.grid = grid;
  Field1D current;
  current.time = grid.t0;
  current.values.resize(grid.nx);
  for (int i = 0; i < grid.nx; ++i) current.values[i] = exact_theta(cfg, lam, grid.t0, grid.x(i));
  sol.snapshots.push_back(current);

  std::vector<double> before;  // values one step behind `current`
  std::vector<double> guess(grid.nx);
  for (int n = 1; n <= grid.nt; ++n) {
    const double t = grid.t(n);
    StepStats stats;
    // Newton starts from the linear extrapolation in time, then from the
    // previous values if that fails.
    if (!before.empty()) {
      for (int i = 0; i < grid.nx; ++i) guess[i] = 2.0 * current.values[i] - before[i];
    }
    before = current.values;
    const double bc_right = exact_theta(cfg, lam, t, x_right);
    try {
      Field1D next;
      try {
        next = cn_step(current, grid, cfg, cfg.theta_l, bc_right, opts.newton, &stats,
                       n > 1 ? std::span<const double>(guess) : std::span<const double>());
      } catch (const NewtonDiverged&) {
        if (n == 1) throw;
        next = cn_step(current, grid, cfg, cfg.theta_l, bc_right, opts.newton, &stats);
      }
      current = std::move(next);
    } catch (const NewtonDiverged& e) {
      throw NewtonDiverged(std::string(e.what()) + " at time step " + std::to_string(n), n);
    }
    current.time = t;
    sol.max_newton_iterations = std::max(sol.max_newton_iterations, stats.newton_iterations);
    if (opts.keep_history || n == grid.nt) sol.snapshots.push_back(current);
  }
  return sol;
}

std::vector<ConvergenceRow> convergence_study(const StefanConfig& cfg,
                                              const std::vector<double>& steps,
                                              double h_min, const NewtonOptions& opts) {
  SolveOptions so;
  so.newton = opts;
  const FdSolution ref = solve(cfg, Grid::equal_steps(cfg, h_min), so);

  std::vector<ConvergenceRow> rows;
  for (double h : steps) {
    const double ratio = h / h_min;
    const long stride = std::lround(ratio);
    if (stride < 1 || std::abs(ratio - static_cast<double>(stride)) > 1e-9 * ratio) {
      throw ConfigError("convergence step must be an integer multiple of h_min");
    }
    const FdSolution coarse = stride == 1 ? ref : solve(cfg, Grid::equal_steps(cfg, h), so);
    double num = 0.0;
    double den = 0.0;
    for (const auto& snap : coarse.snapshots) {
      // Time levels of the two grids need not coincide; the reference is
      // interpolated linearly in time on the shared spatial nodes.
      double pos = (snap.time - ref.grid.t0) / ref.grid.dt;
      if (std::abs(pos - std::round(pos)) < 1e-9) pos = std::round(pos);
      const int n = std::clamp(static_cast<int>(pos), 0, ref.grid.nt - 1);
      const double w = std::clamp(pos - n, 0.0, 1.0);
      const auto& lo = ref.snapshots[n].values;
      const auto& hi = ref.snapshots[n + 1].values;
      for (std::size_t i = 0; i < snap.values.size(); ++i) {
        const std::size_t j = i * static_cast<std::size_t>(stride);
        const double r = (1.0 - w) * lo[j] + w * hi[j];
        num += (snap.values[i] - r) * (snap.values[i] - r);
        den += r * r;
      }
    }
    rows.push_back({h, std::sqrt(num / den)});
  }
  return rows;
}

double loglog_slope(const std::vector<ConvergenceRow>& rows) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(rows.size());
  for (const auto& row : rows) {
    const double lx = std::log(row.h);
    const double ly = std::log(row.rel_l2);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void write_solution(const std::filesystem::path& dir, const FdSolution& sol,
                    const StefanConfig& cfg) {
  std::filesystem::create_directories(dir);
  CsvTable table;
  table.header.push_back("t");
  for (int i = 0; i < sol.grid.nx; ++i) table.header.push_back(format_double(sol.grid.x(i)));
  for (const auto& snap : sol.snapshots) {
    std::vector<double> row;
    row.reserve(snap.values.size() + 1);
    row.push_back(snap.time);
    row.insert(row.end(), snap.values.begin(), snap.values.end());
    table.rows.push_back(std::move(row));
  }
  write_csv(dir / "field.csv", table);

  nlohmann::json meta = {
      {"format", "stefan-fd-field"},
      {"version", 1},
      {"grid", {{"nx", sol.grid.nx}, {"nt", sol.grid.nt}, {"dx", sol.grid.dx},
                {"dt", sol.grid.dt}, {"x0", sol.grid.x0}, {"t0", sol.grid.t0}}},
      {"config", {{"fo", cfg.fo}, {"ste", cfg.ste}, {"delta", cfg.delta},
                  {"theta_l", cfg.theta_l}, {"theta_r", cfg.theta_r},
                  {"t0", cfg.t0}, {"t1", cfg.t1}, {"x0", cfg.x0}, {"x1", cfg.x1}}},
      {"snapshots", sol.snapshots.size()},
      {"max_newton_iterations", sol.max_newton_iterations},
  };
  std::ofstream out(dir / "grid.json");
  out << meta.dump(2) << '\n';
}

FdSolution read_solution(const std::filesystem::path& dir) {
  std::ifstream in(dir / "grid.json");
  if (!in) throw std::runtime_error("missing grid.json in " + dir.string());
  const nlohmann::json meta = nlohmann::json::parse(in);
  FdSolution sol;
  const auto& g = meta.at("grid");
  sol.grid.nx = g.at("nx");
  sol.grid.nt = g.at("nt");
  sol.grid.dx = g.at("dx");
  sol.grid.dt = g.at("dt");
  sol.grid.x0 = g.at("x0");
  sol.grid.t0 = g.at("t0");
  sol.max_newton_iterations = meta.value("max_newton_iterations", 0);

  const CsvTable table = read_csv(dir / "field.csv");
  for (const auto& row : table.rows) {
    if (row.size() != static_cast<std::size_t>(sol.grid.nx) + 1) {
      throw std::runtime_error("field.csv row width does not match grid.json");
    }
    sol.snapshots.push_back(Field1D{std::vector<double>(row.begin() + 1, row.end()), row[0]});
  }
  return sol;
}

}  // namespace stefan::fd
