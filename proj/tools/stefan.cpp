// Command-line front end: exact, fd, converge, train, eval, ensemble.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stefan/core/config.hpp"
#include "stefan/core/csv.hpp"
#include "stefan/core/errors.hpp"
#include "stefan/core/exact.hpp"
#include "stefan/eval/eval.hpp"
#include "stefan/fd/crank_nicolson.hpp"
#include "stefan/sampling/sampling.hpp"
#include "stefan/train/trainer.hpp"

namespace fs = std::filesystem;
using namespace stefan;

namespace {

constexpr const char* kOutEnv = "STEFAN_OUT_ROOT";

fs::path output_root() {
  const char* env = std::getenv(kOutEnv);
  return env && *env ? fs::path(env) : fs::path("runs");
}

void add_physics(CLI::App* app, StefanConfig& cfg) {
  app->add_option("--ste", cfg.ste, "Stefan number")->capture_default_str();
  app->add_option("--fo", cfg.fo, "Fourier number")->capture_default_str();
  app->add_option("--delta", cfg.delta, "regularization width")->capture_default_str();
  app->add_option("--theta-l", cfg.theta_l, "left-wall temperature")->capture_default_str();
  app->add_option("--theta-r", cfg.theta_r, "initial and far-field temperature")
      ->capture_default_str();
  app->add_option("--t0", cfg.t0, "start time")->capture_default_str();
  app->add_option("--t1", cfg.t1, "end time")->capture_default_str();
}

// Flat key=value echo of every resolved setting, readable back through --config.
class Echo {
 public:
  explicit Echo(std::string section) : section_(std::move(section)) {}
  template <class T>
  Echo& put(const std::string& key, const T& v) {
    std::ostringstream s;
    if constexpr (std::is_floating_point_v<T>) {
      s << format_double(v);
    } else {
      s << v;
    }
    lines_.push_back(key + "=" + s.str());
    return *this;
  }
  Echo& physics(const StefanConfig& c) {
    return put("ste", c.ste).put("fo", c.fo).put("delta", c.delta).put("theta-l", c.theta_l)
        .put("theta-r", c.theta_r).put("t0", c.t0).put("t1", c.t1);
  }
  void write(const fs::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "[" << section_ << "]\n";
    for (const auto& l : lines_) out << l << '\n';
  }

 private:
  std::string section_;
  std::vector<std::string> lines_;
};

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

fs::path resolve_out(const std::string& flag, const fs::path& fallback) {
  const fs::path p = flag.empty() ? output_root() / fallback : fs::path(flag);
  fs::create_directories(p);
  return p;
}

std::string variant_name(train::DynamicVariant v) {
  return v == train::DynamicVariant::kPrinted ? "printed" : "unscaled";
}

// ---------------------------------------------------------------- exact

struct ExactArgs {
  StefanConfig cfg;
  int nt = 500, nx = 500;
  std::string out;
};

void run_exact(const ExactArgs& a) {
  a.cfg.validate();
  const fs::path dir = resolve_out(a.out, "exact");
  const InterfaceConstant lam = solve_lambda0(a.cfg);
  const auto grid = eval::EvalGrid::over(a.cfg, a.nt, a.nx);
  std::vector<double> v;
  v.reserve(grid.size());
  for (int i = 0; i < grid.nt; ++i) {
    for (int j = 0; j < grid.nx; ++j) v.push_back(exact_theta(a.cfg, lam, grid.t(i), grid.x(j)));
  }
  eval::write_lattice_csv(dir / "exact.csv", grid, v);
  CsvTable front;
  front.header = {"t", "interface"};
  for (int i = 0; i < grid.nt; ++i) front.rows.push_back({grid.t(i), interface_position(a.cfg, lam, grid.t(i))});
  write_csv(dir / "interface.csv", front);
  write_json(dir / "lambda.json", {{"lambda0", lam.lambda0}, {"residual", lam.residual}});
  Echo("exact").physics(a.cfg).put("nt", a.nt).put("nx", a.nx).write(dir / "config.ini");
  std::cout << "lambda0 " << format_double(lam.lambda0) << " residual "
            << format_double(lam.residual) << "\nwrote " << dir.string() << '\n';
}

// ---------------------------------------------------------------- fd

struct FdArgs {
  StefanConfig cfg;
  double h = 1.0 / 256;
  int nx = 0, nt = 0;
  std::string out;
};

void run_fd(const FdArgs& a) {
  a.cfg.validate();
  const fs::path dir = resolve_out(a.out, "fd");
  const fd::Grid grid = (a.nx > 0 || a.nt > 0) ? fd::Grid::from_counts(a.cfg, a.nx, a.nt)
                                               : fd::Grid::equal_steps(a.cfg, a.h);
  const fd::FdSolution sol = fd::solve(a.cfg, grid);
  fd::write_solution(dir, sol, a.cfg);
  Echo("fd").physics(a.cfg).put("step", a.h).put("nx", grid.nx).put("nt", grid.nt).write(dir / "config.ini");
  std::cout << "grid " << grid.nx << " x " << grid.nt << ", max Newton iterations "
            << sol.max_newton_iterations << "\nwrote " << dir.string() << '\n';
}

// ---------------------------------------------------------------- converge

struct ConvergeArgs {
  StefanConfig cfg;
  std::vector<int> cells = {64, 128, 256};
  int ref_cells = 1024;
  std::string out;
};

void run_converge(const ConvergeArgs& a) {
  a.cfg.validate();
  const fs::path dir = resolve_out(a.out, "converge");
  std::vector<double> steps;
  for (int c : a.cells) {
    if (c <= 0) throw ConfigError("cell counts must be positive");
    steps.push_back(1.0 / c);
  }
  if (a.ref_cells <= 0) throw ConfigError("reference cell count must be positive");
  const auto rows = fd::convergence_study(a.cfg, steps, 1.0 / a.ref_cells);
  CsvTable t;
  t.header = {"h", "rel_l2"};
  for (const auto& r : rows) t.rows.push_back({r.h, r.rel_l2});
  write_csv(dir / "convergence.csv", t);
  const double slope = rows.size() >= 2 ? fd::loglog_slope(rows) : std::nan("");
  write_json(dir / "summary.json", {{"slope", slope}, {"h_min", 1.0 / a.ref_cells}});
  std::ostringstream cells;
  for (std::size_t i = 0; i < a.cells.size(); ++i) cells << (i ? " " : "") << a.cells[i];
  Echo("converge").physics(a.cfg).put("cells", cells.str()).put("ref-cells", a.ref_cells)
      .write(dir / "config.ini");
  for (const auto& r : rows) {
    std::cout << "h " << format_double(r.h) << "  rel_l2 " << format_double(r.rel_l2) << '\n';
  }
  std::cout << "slope " << format_double(slope) << '\n';
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  StefanConfig cfg;
  std::string regime = "uniform";
  train::TrainOptions opts;
  double kappa = 0.0;  // 0: regime default
  std::string variant = "printed";
  double ref_h = 1.0 / 1024;
  bool no_eval = false;
  bool dump_samples = false;
  std::string out;
};

void add_train_options(CLI::App* app, TrainArgs& a) {
  add_physics(app, a.cfg);
  auto& o = a.opts;
  app->add_option("--regime", a.regime, "weighting / curriculum regime")
      ->check(CLI::IsMember({"uniform", "static", "dynamic", "pointwise", "seq-uniform",
                             "seq-static", "seq-dynamic"}))
      ->capture_default_str();
  app->add_option("--iters", o.iterations, "Adam iterations (non-curriculum)")->capture_default_str();
  app->add_option("--budget", o.budget, "curriculum budget n_it * n_r per stage")->capture_default_str();
  app->add_option("--n0", o.n0, "initial points")->capture_default_str();
  app->add_option("--nb", o.nb, "boundary points")->capture_default_str();
  app->add_option("--nr", o.nr, "residual points")->capture_default_str();
  app->add_option("--lr", o.lr.eta, "initial learning rate")->capture_default_str();
  app->add_option("--gamma", o.lr.gamma, "learning-rate decay factor")->capture_default_str();
  app->add_option("--kappa", a.kappa, "decay period (0: 8000, pointwise 5000)");
  app->add_option("--w0", o.static_w0, "static initial-loss weight")->capture_default_str();
  app->add_option("--alpha", o.dynamic_alpha, "dynamic weight smoothing")->capture_default_str();
  app->add_option("--dynamic-every", o.dynamic_every, "dynamic update interval")->capture_default_str();
  app->add_option("--dynamic-variant", a.variant, "printed or unscaled")
      ->check(CLI::IsMember({"printed", "unscaled"}))
      ->capture_default_str();
  app->add_option("--weight-lr", o.weight_lr, "pointwise weight ascent rate")->capture_default_str();
  app->add_option("--dt-seq", o.dt_seq, "curriculum stage length")->capture_default_str();
  app->add_option("--seq-base-nr", o.seq_base_nr, "stage-1 residual points")->capture_default_str();
  app->add_option("--seq-incr", o.seq_incr, "residual points added per stage")->capture_default_str();
  app->add_option("--stage-threshold", o.stage_loss_threshold, "early stage advance loss (0: off)")
      ->capture_default_str();
  app->add_option("--history-every", o.history_every, "history cadence")->capture_default_str();
  app->add_option("--ref-h", a.ref_h, "FD reference step")->capture_default_str();
  app->add_flag("--no-eval", a.no_eval, "skip relative L2 evaluation");
  app->add_flag("--dump-samples", a.dump_samples, "write the sample points");
  app->add_option("--out", a.out, "output directory");
}

train::TrainOptions resolve(const TrainArgs& a) {
  train::TrainOptions o = a.opts;
  const train::TrainOptions d = train::TrainOptions::for_regime(train::parse_regime(a.regime));
  o.regime = d.regime;
  o.lr.kappa = a.kappa > 0.0 ? a.kappa : d.lr.kappa;
  o.dynamic_variant = a.variant == "unscaled" ? train::DynamicVariant::kUnscaled
                                              : train::DynamicVariant::kPrinted;
  o.validate();
  return o;
}

Echo echo_train(const std::string& section, const StefanConfig& cfg, const train::TrainOptions& o,
                const TrainArgs& a) {
  Echo e(section);
  e.physics(cfg)
      .put("regime", train::to_string(o.regime))
      .put("iters", o.iterations)
      .put("budget", o.budget)
      .put("n0", o.n0)
      .put("nb", o.nb)
      .put("nr", o.nr)
      .put("lr", o.lr.eta)
      .put("gamma", o.lr.gamma)
      .put("kappa", o.lr.kappa)
      .put("w0", o.static_w0)
      .put("alpha", o.dynamic_alpha)
      .put("dynamic-every", o.dynamic_every)
      .put("dynamic-variant", variant_name(o.dynamic_variant))
      .put("weight-lr", o.weight_lr)
      .put("dt-seq", o.dt_seq)
      .put("seq-base-nr", o.seq_base_nr)
      .put("seq-incr", o.seq_incr)
      .put("stage-threshold", o.stage_loss_threshold)
      .put("history-every", o.history_every)
      .put("ref-h", a.ref_h);
  std::ostringstream layers;
  for (std::size_t i = 0; i < o.layer_sizes.size(); ++i) layers << (i ? " " : "") << o.layer_sizes[i];
  e.put("# layers", layers.str())
      .put("# init-mask", format_double(o.init_mask.alpha) + " " + format_double(o.init_mask.beta) +
                              " " + format_double(o.init_mask.m))
      .put("# res-mask", format_double(o.res_mask.alpha) + " " + format_double(o.res_mask.beta) +
                             " " + format_double(o.res_mask.m));
  return e;
}

struct RunSummary {
  double rel_l2 = std::nan("");
  long iterations = 0;
  double seconds = 0.0;
};

// One training run with all artifacts under `dir`.
RunSummary train_one(const StefanConfig& cfg, const train::TrainOptions& o, const TrainArgs& a,
                     const eval::Evaluator* ev, const fs::path& dir) {
  fs::create_directories(dir);
  echo_train("train", cfg, o, a).put("seed", o.seed).write(dir / "config.ini");
  if (a.dump_samples) {
    sampling::write_samples(dir / "samples", sampling::build_sample_set(cfg, o.n0, o.nb, o.nr, o.seed));
  }
  train::Evaluator fn;
  if (ev) fn = [ev](const nn::Mlp& net, double t_end) { return ev->rel_l2(net, t_end); };
  const auto start = std::chrono::steady_clock::now();
  const train::TrainResult r = train::train(cfg, o, fn);
  RunSummary s;
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  s.iterations = r.iterations;
  train::write_history(dir / "history.csv", r.history);
  if (!r.stages.empty()) train::write_stages(dir / "stages.csv", r.stages);
  nn::save_checkpoint(dir / "model.txt", r.net);
  if (ev) s.rel_l2 = r.history.back().rel_l2;
  write_json(dir / "summary.json", {{"seed", o.seed},
                                     {"regime", train::to_string(o.regime)},
                                     {"iterations", s.iterations},
                                     {"rel_l2", ev ? nlohmann::json(s.rel_l2) : nlohmann::json()},
                                     {"omega_0", r.weights.w0},
                                     {"omega_b", r.weights.wb},
                                     {"seconds", s.seconds}});
  return s;
}

std::unique_ptr<eval::Evaluator> make_evaluator(const StefanConfig& cfg, const TrainArgs& a) {
  if (a.no_eval) return nullptr;
  const fd::FdSolution ref = eval::reference_solution(cfg, a.ref_h);
  return std::make_unique<eval::Evaluator>(ref, eval::EvalGrid::over(cfg));
}

void run_train(const TrainArgs& a) {
  a.cfg.validate();
  const train::TrainOptions o = resolve(a);
  const fs::path dir =
      resolve_out(a.out, fs::path("train") / (a.regime + "_seed" + std::to_string(o.seed)));
  const auto ev = make_evaluator(a.cfg, a);
  const RunSummary s = train_one(a.cfg, o, a, ev.get(), dir);
  std::cout << train::to_string(o.regime) << " seed " << o.seed << ": " << s.iterations
            << " iterations in " << format_double(s.seconds) << " s";
  if (ev) std::cout << ", rel_l2 " << format_double(s.rel_l2);
  std::cout << "\nwrote " << dir.string() << '\n';
}

// ---------------------------------------------------------------- ensemble

struct EnsembleArgs {
  TrainArgs train;
  std::vector<std::uint64_t> seeds;
  int n_seeds = 5;
};

void run_ensemble(const EnsembleArgs& e) {
  const TrainArgs& a = e.train;
  a.cfg.validate();
  const train::TrainOptions base = resolve(a);
  if (a.no_eval) throw ConfigError("an ensemble needs the relative L2 evaluation");
  std::vector<std::uint64_t> seeds = e.seeds;
  if (seeds.empty()) {
    if (e.n_seeds < 1) throw ConfigError("ensemble needs at least one seed");
    for (int s = 0; s < e.n_seeds; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
  }
  const fs::path dir = resolve_out(a.out, fs::path("ensemble") / a.regime);
  const auto ev = make_evaluator(a.cfg, a);
  const auto report = eval::ensemble(
      [&](std::uint64_t seed) {
        train::TrainOptions o = base;
        o.seed = seed;
        const RunSummary s = train_one(a.cfg, o, a, ev.get(), dir / ("seed_" + std::to_string(seed)));
        std::cout << "seed " << seed << ": rel_l2 " << format_double(s.rel_l2) << '\n';
        return s.rel_l2;
      },
      seeds);

  std::ofstream csv(dir / "report.csv");
  csv << "seed,ok,rel_l2,error\n";
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& o : report.outcomes) {
    csv << o.seed << ',' << (o.ok ? 1 : 0) << ',' << (o.ok ? format_double(o.rel_l2) : "") << ",\""
        << o.error << "\"\n";
    runs.push_back({{"seed", o.seed}, {"ok", o.ok}, {"rel_l2", o.ok ? nlohmann::json(o.rel_l2) : nlohmann::json()},
                    {"error", o.error}, {"history", "seed_" + std::to_string(o.seed) + "/history.csv"}});
  }
  write_json(dir / "report.json", {{"regime", a.regime},
                                   {"mean", report.mean},
                                   {"std", report.stddev},
                                   {"median", report.median},
                                   {"succeeded", report.succeeded},
                                   {"runs", runs}});
  std::ostringstream list;
  for (std::size_t i = 0; i < seeds.size(); ++i) list << (i ? " " : "") << seeds[i];
  echo_train("ensemble", a.cfg, base, a).put("seeds", list.str()).write(dir / "config.ini");
  std::cout << a.regime << ": mean " << format_double(report.mean) << " std "
            << format_double(report.stddev) << " over " << report.succeeded << "/"
            << report.outcomes.size() << " seeds\n";
  if (report.succeeded == 0) throw NumericalError("every ensemble member failed");
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  StefanConfig cfg;
  std::string checkpoint;
  double ref_h = 1.0 / 1024;
  int nt = 500, nx = 500;
  std::vector<double> slices = {0.05, 0.53, 1.0};
  std::string out;
};

void run_eval(const EvalArgs& a) {
  a.cfg.validate();
  const nn::Mlp net = nn::load_checkpoint(a.checkpoint);
  const fs::path dir = resolve_out(a.out, "eval");
  const fd::FdSolution ref = eval::reference_solution(a.cfg, a.ref_h);
  const auto grid = eval::EvalGrid::over(a.cfg, a.nt, a.nx);
  const eval::Evaluator ev(ref, grid);
  const eval::EvalResult res = ev.evaluate(net);
  eval::write_lattice_csv(dir / "error_field.csv", grid, res.abs_error);

  CsvTable slices;
  slices.header = {"t", "x", "prediction", "reference", "abs_error"};
  for (double t : a.slices) {
    for (int j = 0; j < grid.nx; ++j) {
      const double x = grid.x(j);
      const double p = nn::forward(net, t, x);
      const double r = eval::sample_bilinear(ref, t, x);
      slices.rows.push_back({t, x, p, r, std::abs(p - r)});
    }
  }
  write_csv(dir / "slices.csv", slices);
  write_json(dir / "metrics.json", {{"rel_l2", res.rel_l2}, {"checkpoint", a.checkpoint}});
  Echo("eval").physics(a.cfg).put("checkpoint", a.checkpoint).put("ref-h", a.ref_h)
      .put("nt", a.nt).put("nx", a.nx).write(dir / "config.ini");
  std::cout << "rel_l2 " << format_double(res.rel_l2) << "\nwrote " << dir.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-dimensional Stefan melting problem: exact, finite-difference and PINN solvers"};
  app.set_config("--config", "", "INI file with one section per subcommand");
  app.require_subcommand(1);
  std::uint64_t seed = 0;

  ExactArgs exact;
  auto* c_exact = app.add_subcommand("exact", "exact solution and lambda0");
  add_physics(c_exact, exact.cfg);
  c_exact->add_option("--nt", exact.nt, "lattice times")->capture_default_str();
  c_exact->add_option("--nx", exact.nx, "lattice positions")->capture_default_str();
  c_exact->add_option("--out", exact.out, "output directory");
  c_exact->add_option("--seed", seed, "unused; accepted everywhere");

  FdArgs fdargs;
  auto* c_fd = app.add_subcommand("fd", "finite-difference reference solve");
  add_physics(c_fd, fdargs.cfg);
  c_fd->add_option("--step", fdargs.h, "dx = dt step")->capture_default_str();
  c_fd->add_option("--nx", fdargs.nx, "nodes (overrides --h)");
  c_fd->add_option("--nt", fdargs.nt, "time steps (overrides --h)");
  c_fd->add_option("--out", fdargs.out, "output directory");
  c_fd->add_option("--seed", seed, "unused; accepted everywhere");

  ConvergeArgs conv;
  auto* c_conv = app.add_subcommand("converge", "FD convergence study");
  add_physics(c_conv, conv.cfg);
  c_conv->add_option("--cells", conv.cells, "cells per unit length of each coarse grid")
      ->capture_default_str();
  c_conv->add_option("--ref-cells", conv.ref_cells, "cells of the reference grid")
      ->capture_default_str();
  c_conv->add_option("--out", conv.out, "output directory");
  c_conv->add_option("--seed", seed, "unused; accepted everywhere");

  TrainArgs trainargs;
  auto* c_train = app.add_subcommand("train", "train one PINN");
  add_train_options(c_train, trainargs);
  c_train->add_option("--seed", trainargs.opts.seed, "run seed")->capture_default_str();

  EnsembleArgs ens;
  auto* c_ens = app.add_subcommand("ensemble", "train over several seeds and aggregate");
  add_train_options(c_ens, ens.train);
  c_ens->add_option("--seeds", ens.seeds, "explicit seeds");
  c_ens->add_option("--n-seeds", ens.n_seeds, "seeds 0..n-1 when --seeds is absent")
      ->capture_default_str();
  c_ens->add_option("--seed", seed, "unused; see --seeds");

  EvalArgs evalargs;
  auto* c_eval = app.add_subcommand("eval", "evaluate a checkpoint against the FD reference");
  add_physics(c_eval, evalargs.cfg);
  c_eval->add_option("--checkpoint", evalargs.checkpoint, "model.txt from train")->required();
  c_eval->add_option("--ref-h", evalargs.ref_h, "FD reference step")->capture_default_str();
  c_eval->add_option("--nt", evalargs.nt, "lattice times")->capture_default_str();
  c_eval->add_option("--nx", evalargs.nx, "lattice positions")->capture_default_str();
  c_eval->add_option("--slices", evalargs.slices, "slice times")->capture_default_str();
  c_eval->add_option("--out", evalargs.out, "output directory");
  c_eval->add_option("--seed", seed, "unused; accepted everywhere");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (c_exact->parsed()) run_exact(exact);
    if (c_fd->parsed()) run_fd(fdargs);
    if (c_conv->parsed()) run_converge(conv);
    if (c_train->parsed()) run_train(trainargs);
    if (c_ens->parsed()) run_ensemble(ens);
    if (c_eval->parsed()) run_eval(evalargs);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
