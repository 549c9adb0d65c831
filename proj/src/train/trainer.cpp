#include "stefan/train/trainer.hpp"

#include <cmath>
#include <limits>

#include "stefan/core/csv.hpp"
#include "stefan/core/errors.hpp"
#include "stefan/nn/batch.hpp"

namespace stefan::train {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct RegimeName {
  Regime regime;
  const char* name;
};

constexpr RegimeName kRegimes[] = {
    {Regime::kUniform, "uniform"},         {Regime::kStatic, "static"},
    {Regime::kDynamic, "dynamic"},         {Regime::kPointwise, "pointwise"},
    {Regime::kSeqUniform, "seq-uniform"},  {Regime::kSeqStatic, "seq-static"},
    {Regime::kSeqDynamic, "seq-dynamic"},
};

bool is_static(Regime r) { return r == Regime::kStatic || r == Regime::kSeqStatic; }
bool is_dynamic(Regime r) { return r == Regime::kDynamic || r == Regime::kSeqDynamic; }

double mean_abs(const Eigen::VectorXd& v) { return v.cwiseAbs().mean(); }

// Optimization state shared by the plain and curriculum drivers.
class Runner {
 public:
  Runner(const StefanConfig& cfg, const TrainOptions& opts, const Evaluator& evaluator,
         TrainResult& out)
      : cfg_(cfg), opts_(opts), evaluator_(evaluator), out_(out), adam_(out.net.size()) {
    if (is_static(opts.regime)) out_.weights.w0 = opts.static_w0;
  }

  void enable_point_weights(std::size_t n_init, std::size_t n_res) {
    PointWeights pw = init_point_weights(n_init, n_res, sampling::derive_seed(opts_.seed, 20));
    pw.init_mask = opts_.init_mask;
    pw.res_mask = opts_.res_mask;
    out_.point_weights = std::move(pw);
    adam_w_init_ = AdamState(static_cast<Eigen::Index>(n_init));
    adam_w_res_ = AdamState(static_cast<Eigen::Index>(n_res));
  }

  // Evaluates the loss at iteration `it`, records history when due, and
  // unless `last` applies one optimizer update. Returns the weighted loss.
  double step(const TrainingPoints& pts, long it, bool last) {
    PointWeights* pw = out_.point_weights ? &*out_.point_weights : nullptr;
    TermGradients tg = term_gradients(engine_, out_.net, cfg_, pts, pw);
    ScalarWeights& w = out_.weights;

    if (is_dynamic(opts_.regime) && it > 0 && it % opts_.dynamic_every == 0) {
      const double max_r = tg.g_r.flat().cwiseAbs().maxCoeff();
      try {
        w.w0 = dynamic_reweight(w.w0, max_r, mean_abs(tg.g_0.flat()), opts_.dynamic_alpha,
                                opts_.dynamic_variant);
      } catch (const DegenerateStats&) {
      }
      try {
        w.wb = dynamic_reweight(w.wb, max_r, mean_abs(tg.g_b.flat()), opts_.dynamic_alpha,
                                opts_.dynamic_variant);
      } catch (const DegenerateStats&) {
      }
    }

    const LossBreakdown& l = tg.loss;
    const double total =
        pw ? l.l_0 + l.l_b + l.l_r : w.w0 * l.l_0 + w.wb * l.l_b + w.wr * l.l_r;
    if (!std::isfinite(total)) {
      throw NanLoss("loss is not finite at iteration " + std::to_string(it), it);
    }
    const double lr = opts_.lr.rate(static_cast<double>(it));

    if (last || it % opts_.history_every == 0) {
      HistoryRow row;
      row.iteration = it;
      row.l_r = l.l_r;
      row.l_0 = l.l_0;
      row.l_b = l.l_b;
      if (pw) {
        row.omega_0 = mean_mask(pw->w_init, pw->init_mask);
        row.omega_b = 1.0;
        row.omega_r = mean_mask(pw->w_res, pw->res_mask);
      } else {
        row.omega_0 = w.w0;
        row.omega_b = w.wb;
        row.omega_r = w.wr;
      }
      row.lr = lr;
      row.rel_l2 = evaluator_ ? evaluator_(out_.net, cfg_.t1) : kNaN;
      out_.history.push_back(row);
    }
    if (last) return total;

    Eigen::VectorXd grad = pw ? Eigen::VectorXd(tg.g_0.flat() + tg.g_b.flat() + tg.g_r.flat())
                              : Eigen::VectorXd(w.w0 * tg.g_0.flat() + w.wb * tg.g_b.flat() +
                                                w.wr * tg.g_r.flat());
    adam_step(adam_, out_.net.flat(), grad, lr);
    if (pw) {
      // Ascent on the weights: descend the negated gradient.
      Eigen::Map<Eigen::VectorXd> wi(pw->w_init.data(), static_cast<Eigen::Index>(pw->w_init.size()));
      Eigen::Map<Eigen::VectorXd> wr(pw->w_res.data(), static_cast<Eigen::Index>(pw->w_res.size()));
      const Eigen::Map<const Eigen::VectorXd> gi(tg.d_w_init.data(),
                                                 static_cast<Eigen::Index>(tg.d_w_init.size()));
      const Eigen::Map<const Eigen::VectorXd> gr(tg.d_w_res.data(),
                                                 static_cast<Eigen::Index>(tg.d_w_res.size()));
      adam_step(adam_w_init_, wi, -gi, opts_.weight_lr);
      adam_step(adam_w_res_, wr, -gr, opts_.weight_lr);
    }
    return total;
  }

 private:
  static double mean_mask(const std::vector<double>& w, const MaskParams& p) {
    double s = 0.0;
    for (double v : w) s += mask(v, p);
    return s / static_cast<double>(w.size());
  }

  const StefanConfig& cfg_;
  const TrainOptions& opts_;
  const Evaluator& evaluator_;
  TrainResult& out_;
  nn::BatchEngine engine_;
  AdamState adam_, adam_w_init_, adam_w_res_;
};

}  // namespace

std::string to_string(Regime r) {
  for (const auto& e : kRegimes) {
    if (e.regime == r) return e.name;
  }
  return "unknown";
}

Regime parse_regime(const std::string& name) {
  for (const auto& e : kRegimes) {
    if (name == e.name) return e.regime;
  }
  throw ConfigError("unknown regime '" + name + "'");
}

bool is_curriculum(Regime r) noexcept {
  return r == Regime::kSeqUniform || r == Regime::kSeqStatic || r == Regime::kSeqDynamic;
}

TrainOptions TrainOptions::for_regime(Regime r) {
  TrainOptions o;
  o.regime = r;
  if (r == Regime::kPointwise) o.lr.kappa = 5000.0;
  return o;
}

void TrainOptions::validate() const {
  lr.validate();
  if (iterations < 0) throw ConfigError("iterations must be non-negative");
  if (n0 == 0 || nb == 0 || nr == 0) throw ConfigError("point counts must be positive");
  if (!(static_w0 > 0.0)) throw ConfigError("static weight must be positive");
  if (!(dynamic_alpha >= 0.0 && dynamic_alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (dynamic_every <= 0) throw ConfigError("dynamic update interval must be positive");
  if (!(weight_lr > 0.0)) throw ConfigError("weight learning rate must be positive");
  for (const MaskParams* m : {&init_mask, &res_mask}) {
    if (!(m->alpha > 0.0 && m->beta > 0.0)) throw ConfigError("mask alpha and beta must be positive");
  }
  if (history_every <= 0) throw ConfigError("history interval must be positive");
  if (stage_loss_threshold < 0.0) throw ConfigError("stage loss threshold must be non-negative");
  if (layer_sizes.size() < 2 || layer_sizes.front() != 2 || layer_sizes.back() != 1) {
    throw ConfigError("network must map 2 inputs to 1 output");
  }
}

TrainResult train(const StefanConfig& cfg, const TrainOptions& opts, const Evaluator& evaluator) {
  cfg.validate();
  opts.validate();
  TrainResult out;
  out.net = nn::xavier_init(opts.layer_sizes, sampling::derive_seed(opts.seed, 10));
  Runner runner(cfg, opts, evaluator, out);
  const sampling::SampleSet samples = sampling::build_sample_set(cfg, opts.n0, opts.nb, opts.nr, opts.seed);

  if (!is_curriculum(opts.regime)) {
    if (opts.regime == Regime::kPointwise) runner.enable_point_weights(opts.n0, opts.nr);
    const TrainingPoints pts = view(samples);
    for (long it = 0; it <= opts.iterations; ++it) runner.step(pts, it, it == opts.iterations);
    out.iterations = opts.iterations;
    return out;
  }

  const sampling::CurriculumSchedule sched =
      sampling::build_curriculum(cfg, opts.dt_seq, opts.seq_base_nr, opts.seq_incr, opts.budget);
  const sampling::CurriculumPoints cpts =
      sampling::curriculum_residual_points(cfg, sched, sampling::derive_seed(opts.seed, 30));

  long g = 0;
  TrainingPoints pts = view(samples);
  std::vector<double> bt, bx, btarget;
  for (const auto& st : sched.stages) {
    bt.clear();
    bx.clear();
    btarget.clear();
    for (std::size_t i = 0; i < samples.boundary_t.size(); ++i) {
      if (samples.boundary_t[i] <= st.t_end) {
        bt.push_back(samples.boundary_t[i]);
        bx.push_back(samples.boundary_x[i]);
        btarget.push_back(samples.boundary_target[i]);
      }
    }
    pts.bnd_t = bt;
    pts.bnd_x = bx;
    pts.bnd_target = btarget;
    pts.res_t = std::span<const double>(cpts.t.data(), st.n_residual);
    pts.res_x = std::span<const double>(cpts.x.data(), st.n_residual);

    for (long i = 0; i < st.n_iterations; ++i) {
      const double total = runner.step(pts, g, false);
      ++g;
      if (opts.stage_loss_threshold > 0.0 && total < opts.stage_loss_threshold) break;
    }
    out.stages.push_back({st.k, st.t_end, g, evaluator ? evaluator(out.net, st.t_end) : kNaN});
  }
  runner.step(pts, g, true);
  out.iterations = g;
  return out;
}

namespace {

const std::vector<std::string> kHistoryHeader = {"iteration", "l_r",     "l_0",     "l_b",   "omega_0",
                                                 "omega_b",   "omega_r", "lr",      "rel_l2"};

}  // namespace

void write_history(const std::filesystem::path& path, const std::vector<HistoryRow>& rows) {
  CsvTable t;
  t.header = kHistoryHeader;
  for (const auto& r : rows) {
    t.rows.push_back({static_cast<double>(r.iteration), r.l_r, r.l_0, r.l_b, r.omega_0, r.omega_b,
                      r.omega_r, r.lr, r.rel_l2});
  }
  write_csv(path, t);
}

std::vector<HistoryRow> read_history(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  if (t.header != kHistoryHeader) throw std::runtime_error("not a history file: " + path.string());
  std::vector<HistoryRow> rows;
  for (const auto& v : t.rows) {
    if (v.size() != kHistoryHeader.size()) throw std::runtime_error("short history row");
    rows.push_back({static_cast<long>(v[0]), v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]});
  }
  return rows;
}

void write_stages(const std::filesystem::path& path, const std::vector<StageRecord>& rows) {
  CsvTable t;
  t.header = {"stage", "t_end", "iteration", "rel_l2"};
  for (const auto& r : rows) {
    t.rows.push_back({static_cast<double>(r.k), r.t_end, static_cast<double>(r.iterations_end), r.rel_l2});
  }
  write_csv(path, t);
}

}  // namespace stefan::train
