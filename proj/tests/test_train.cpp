#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>

#include "stefan/core/errors.hpp"
#include "stefan/core/regularization.hpp"
#include "stefan/sampling/sampling.hpp"
#include "stefan/train/loss.hpp"
#include "stefan/train/optim.hpp"
#include "stefan/train/trainer.hpp"

using namespace stefan;
using stefan::train::AdamState;
using stefan::train::DynamicVariant;
using stefan::train::LossBreakdown;
using stefan::train::MaskParams;
using stefan::train::PointWeights;
using stefan::train::Regime;
using stefan::train::ScalarWeights;
using stefan::train::TrainOptions;
using stefan::train::TrainingPoints;

namespace {

const std::vector<int> kSmall = {2, 6, 6, 1};

nn::Mlp zero_net(const std::vector<int>& sizes) {
  nn::Mlp net = nn::xavier_init(sizes, 1);
  net.flat().setZero();
  return net;
}

TrainOptions small_options(Regime r) {
  TrainOptions o = TrainOptions::for_regime(r);
  o.layer_sizes = kSmall;
  o.n0 = 16;
  o.nb = 8;
  o.nr = 40;
  o.iterations = 30;
  o.history_every = 10;
  return o;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("residual of a jet") {
  StefanConfig cfg;
  CHECK(train::residual(nn::Jet2{}, cfg) == 0.0);
  CHECK(train::residual(zero_net(kSmall), cfg, 0.3, 0.4) == 0.0);

  // theta_t = 1 far from the front: coefficient 1; at theta = 0: 1 + 1 / (2 delta Ste).
  const nn::Jet2 far{5.0, 1.0, 0.0, 0.0};
  CHECK(train::residual(far, cfg) == doctest::Approx(1.0).epsilon(1e-12));
  const nn::Jet2 at_front{0.0, 1.0, 0.0, 0.0};
  CHECK(train::residual(at_front, cfg) == doctest::Approx(1.0 + 10.0 / 0.5).epsilon(1e-14));
  cfg.ste = 0.005;
  CHECK(train::residual(at_front, cfg) == doctest::Approx(1.0 + 10.0 / 0.005).epsilon(1e-14));
  const nn::Jet2 curv{0.0, 0.0, 3.0, 2.0};
  CHECK(train::residual(curv, cfg) == doctest::Approx(-0.02).epsilon(1e-14));
}

TEST_CASE("loss terms of the zero network") {
  const StefanConfig cfg;
  const auto s = sampling::build_sample_set(cfg, 32, 16, 64, 3);
  const TrainingPoints pts = train::view(s);
  const nn::Mlp net = zero_net(kSmall);

  double l0 = 0.0;
  for (double v : s.initial_target) l0 += v * v;
  l0 /= 32.0;
  double lb = 0.0;
  for (double v : s.boundary_target) lb += v * v;
  lb /= 16.0;

  const LossBreakdown a = train::assemble_loss(net, cfg, pts, ScalarWeights{});
  CHECK(a.l_r == 0.0);
  CHECK(a.l_0 == doctest::Approx(l0).epsilon(1e-14));
  CHECK(a.l_b == doctest::Approx(lb).epsilon(1e-14));
  CHECK(a.l_b >= 0.5);  // eight left-wall points with target 1
  CHECK(a.weighted_total == doctest::Approx(l0 + lb).epsilon(1e-14));

  const LossBreakdown b = train::assemble_loss(net, cfg, pts, ScalarWeights{100.0, 2.0, 1.0});
  CHECK(b.weighted_total == doctest::Approx(100.0 * l0 + 2.0 * lb).epsilon(1e-14));
}

TEST_CASE("empty boundary family contributes nothing") {
  const StefanConfig cfg;
  const auto s = sampling::build_sample_set(cfg, 8, 4, 16, 6);
  TrainingPoints pts = train::view(s);
  pts.bnd_t = {};
  pts.bnd_x = {};
  pts.bnd_target = {};
  const nn::Mlp net = nn::xavier_init(kSmall, 2);
  nn::BatchEngine engine(4);
  const auto tg = train::term_gradients(engine, net, cfg, pts);
  CHECK(tg.loss.l_b == 0.0);
  CHECK(tg.g_b.flat().isZero(0.0));
  CHECK(train::assemble_loss(net, cfg, pts, ScalarWeights{}).l_b == 0.0);
  pts.res_t = {};
  pts.res_x = {};
  CHECK_THROWS_AS(train::term_gradients(engine, net, cfg, pts), ConfigError);
}

TEST_CASE("residual weight scales its term") {
  const StefanConfig cfg;
  const auto s = sampling::build_sample_set(cfg, 16, 8, 32, 4);
  const nn::Mlp net = nn::xavier_init(kSmall, 9);
  const auto one = train::assemble_loss(net, cfg, train::view(s), ScalarWeights{0.0, 0.0, 1.0});
  const auto two = train::assemble_loss(net, cfg, train::view(s), ScalarWeights{0.0, 0.0, 2.0});
  CHECK(one.l_r > 0.0);
  CHECK(one.weighted_total == doctest::Approx(one.l_r).epsilon(1e-14));
  CHECK(two.weighted_total == doctest::Approx(2.0 * one.l_r).epsilon(1e-14));
}

TEST_CASE("adam") {
  SUBCASE("zero gradient") {
    AdamState st(3);
    Eigen::VectorXd p(3);
    p << 1.0, -2.0, 3.0;
    const Eigen::VectorXd before = p;
    train::adam_step(st, p, Eigen::VectorXd::Zero(3), 0.1);
    CHECK(p == before);
    CHECK(st.step == 1);
  }
  SUBCASE("first step moves by lr against the gradient sign") {
    AdamState st(2);
    Eigen::VectorXd p = Eigen::VectorXd::Zero(2);
    Eigen::VectorXd g(2);
    g << 3.0, -0.5;
    train::adam_step(st, p, g, 0.01);
    CHECK(p[0] == doctest::Approx(-0.01).epsilon(1e-7));
    CHECK(p[1] == doctest::Approx(0.01).epsilon(1e-7));
  }
  SUBCASE("quadratic trajectory") {
    AdamState st(1);
    Eigen::VectorXd x(1);
    x << 1.0;
    const std::pair<int, double> expect[] = {{1, 0.9000000005},
                                             {2, 0.8004122286917928},
                                             {10, 0.07624915560691221},
                                             {50, -0.004818223222661105},
                                             {100, 0.002936675681102549}};
    int k = 0;
    for (int t = 1; t <= 100; ++t) {
      train::adam_step(st, x, 2.0 * x, 0.1);
      if (t == expect[k].first) {
        CHECK(std::abs(x[0] - expect[k].second) <= 1e-12);
        ++k;
      }
    }
  }
  SUBCASE("size mismatch") {
    AdamState st(2);
    Eigen::VectorXd p = Eigen::VectorXd::Zero(3);
    CHECK_THROWS_AS(train::adam_step(st, p, Eigen::VectorXd::Zero(3), 0.1), ConfigError);
  }
}

TEST_CASE("learning rate schedule") {
  const train::LrSchedule s{1e-3, 0.9, 8000.0};
  CHECK(s.rate(0) == 1e-3);
  CHECK(s.rate(8000) == doctest::Approx(9e-4).epsilon(1e-14));
  CHECK(s.rate(4000) == doctest::Approx(1e-3 * std::sqrt(0.9)).epsilon(1e-14));
  CHECK(s.rate(80000) == doctest::Approx(1e-3 * std::pow(0.9, 10)).epsilon(1e-14));
  CHECK_THROWS_AS((train::LrSchedule{0.0, 0.9, 1.0}.validate()), ConfigError);
  CHECK_THROWS_AS((train::LrSchedule{1e-3, 1.5, 1.0}.validate()), ConfigError);
  CHECK_THROWS_AS((train::LrSchedule{1e-3, 0.9, 0.0}.validate()), ConfigError);
  CHECK(TrainOptions::for_regime(Regime::kPointwise).lr.kappa == 5000.0);
  CHECK(TrainOptions::for_regime(Regime::kDynamic).lr.kappa == 8000.0);
}

TEST_CASE("dynamic reweighting") {
  using train::dynamic_reweight;
  CHECK(dynamic_reweight(3.0, 10.0, 0.5, 0.0) == 3.0);
  CHECK(dynamic_reweight(3.0, 10.0, 0.5, 0.0, DynamicVariant::kUnscaled) == 3.0);
  // Fixed points: printed form at max = w^2 mean, unscaled at max = w mean.
  CHECK(dynamic_reweight(4.0, 16.0 * 0.25, 0.25) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(dynamic_reweight(4.0, 4.0 * 0.25, 0.25, 0.6, DynamicVariant::kUnscaled) ==
        doctest::Approx(4.0).epsilon(1e-15));
  CHECK(dynamic_reweight(1.0, 2.0, 0.5) == doctest::Approx(0.4 + 0.6 * 4.0).epsilon(1e-15));
  CHECK(dynamic_reweight(2.0, 2.0, 0.5, 1.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(dynamic_reweight(2.0, 2.0, 0.5, 1.0, DynamicVariant::kUnscaled) ==
        doctest::Approx(4.0).epsilon(1e-15));
  CHECK_THROWS_AS(dynamic_reweight(1.0, 2.0, 0.0), DegenerateStats);
  CHECK_THROWS_AS(dynamic_reweight(1.0, std::nan(""), 1.0), DegenerateStats);
  CHECK_THROWS_AS(dynamic_reweight(0.0, 2.0, 1.0), ConfigError);
  CHECK_THROWS_AS(dynamic_reweight(1.0, 2.0, 1.0, 1.5), ConfigError);
}

TEST_CASE("masks") {
  const MaskParams init{1000.0, 0.1, 2.0};
  const MaskParams res{1.0, 1.0, 5.0};
  CHECK(train::mask(2.0, init) == 500.0);
  CHECK(train::mask(5.0, res) == 0.5);
  double prev = -1.0;
  for (double w = -20.0; w <= 20.0; w += 0.5) {
    const double v = train::mask(w, res);
    CHECK(v > prev);
    CHECK(v > 0.0);
    CHECK(v < 1.0);
    prev = v;
  }
  for (const MaskParams& p : {init, res}) {
    for (double w : {-3.0, 0.0, 0.7, 2.0, 5.0, 9.0}) {
      const double h = 1e-5;
      const double fd = (train::mask(w + h, p) - train::mask(w - h, p)) / (2 * h);
      CHECK(train::mask_prime(w, p) == doctest::Approx(fd).epsilon(1e-7));
    }
  }
}

TEST_CASE("combined gradient matches finite differences") {
  StefanConfig cfg;
  cfg.ste = 0.05;
  const auto s = sampling::build_sample_set(cfg, 12, 6, 20, 11);
  const TrainingPoints pts = train::view(s);
  nn::Mlp net = nn::xavier_init(kSmall, 21);
  nn::BatchEngine engine(8);

  const ScalarWeights cases[] = {{1.0, 1.0, 1.0}, {100.0, 1.0, 1.0}, {7.5, 0.3, 1.0}};
  for (const ScalarWeights& w : cases) {
    const auto tg = train::term_gradients(engine, net, cfg, pts);
    CHECK(tg.d_w_init.empty());
    const Eigen::VectorXd g = w.w0 * tg.g_0.flat() + w.wb * tg.g_b.flat() + w.wr * tg.g_r.flat();
    const auto direct = train::assemble_loss(net, cfg, pts, w);
    CHECK(tg.loss.l_r == doctest::Approx(direct.l_r).epsilon(1e-12));
    for (Eigen::Index i = 0; i < net.size(); i += 3) {
      const double h = 1e-6;
      const double keep = net.flat()[i];
      net.flat()[i] = keep + h;
      const double up = train::assemble_loss(net, cfg, pts, w).weighted_total;
      net.flat()[i] = keep - h;
      const double down = train::assemble_loss(net, cfg, pts, w).weighted_total;
      net.flat()[i] = keep;
      const double fd = (up - down) / (2 * h);
      CHECK(g[i] == doctest::Approx(fd).epsilon(1e-5).scale(1e-3));
    }
  }

  SUBCASE("pointwise") {
    PointWeights pw = train::init_point_weights(12, 20, 5);
    const auto tg = train::term_gradients(engine, net, cfg, pts, &pw);
    const Eigen::VectorXd g = tg.g_0.flat() + tg.g_b.flat() + tg.g_r.flat();
    const auto direct = train::assemble_loss(net, cfg, pts, pw);
    CHECK(tg.loss.l_0 == doctest::Approx(direct.l_0).epsilon(1e-12));
    CHECK(direct.weighted_total == doctest::Approx(direct.l_0 + direct.l_b + direct.l_r));
    for (Eigen::Index i = 0; i < net.size(); i += 3) {
      const double h = 1e-6;
      const double keep = net.flat()[i];
      net.flat()[i] = keep + h;
      const double up = train::assemble_loss(net, cfg, pts, pw).weighted_total;
      net.flat()[i] = keep - h;
      const double down = train::assemble_loss(net, cfg, pts, pw).weighted_total;
      net.flat()[i] = keep;
      CHECK(g[i] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-5).scale(1e-2));
    }
    REQUIRE(tg.d_w_init.size() == 12);
    REQUIRE(tg.d_w_res.size() == 20);
    for (std::size_t i = 0; i < 12; i += 2) {
      const double h = 1e-6;
      const double keep = pw.w_init[i];
      pw.w_init[i] = keep + h;
      const double up = train::assemble_loss(net, cfg, pts, pw).l_0;
      pw.w_init[i] = keep - h;
      const double down = train::assemble_loss(net, cfg, pts, pw).l_0;
      pw.w_init[i] = keep;
      CHECK(tg.d_w_init[i] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-5).scale(1e-4));
    }
    for (std::size_t i = 0; i < 20; i += 3) {
      const double h = 1e-6;
      const double keep = pw.w_res[i];
      pw.w_res[i] = keep + h;
      const double up = train::assemble_loss(net, cfg, pts, pw).l_r;
      pw.w_res[i] = keep - h;
      const double down = train::assemble_loss(net, cfg, pts, pw).l_r;
      pw.w_res[i] = keep;
      CHECK(tg.d_w_res[i] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-5).scale(1e-6));
    }
  }
}

TEST_CASE("weight ascent does not decrease the loss") {
  const StefanConfig cfg;
  nn::BatchEngine engine(16);
  int increased = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    const auto s = sampling::build_sample_set(cfg, 10, 4, 20, 100 + trial);
    const TrainingPoints pts = train::view(s);
    const nn::Mlp net = nn::xavier_init(kSmall, 300 + trial);
    PointWeights pw = train::init_point_weights(10, 20, 500 + trial);
    const double before = train::assemble_loss(net, cfg, pts, pw).weighted_total;
    const auto tg = train::term_gradients(engine, net, cfg, pts, &pw);
    AdamState ai(10), ar(20);
    Eigen::Map<Eigen::VectorXd> wi(pw.w_init.data(), 10), wr(pw.w_res.data(), 20);
    train::adam_step(ai, wi, -Eigen::Map<const Eigen::VectorXd>(tg.d_w_init.data(), 10), 1e-5);
    train::adam_step(ar, wr, -Eigen::Map<const Eigen::VectorXd>(tg.d_w_res.data(), 20), 1e-5);
    const double after = train::assemble_loss(net, cfg, pts, pw).weighted_total;
    if (after >= before) ++increased;
  }
  CHECK(increased == 100);
}

TEST_CASE("regime names") {
  for (Regime r : {Regime::kUniform, Regime::kStatic, Regime::kDynamic, Regime::kPointwise,
                   Regime::kSeqUniform, Regime::kSeqStatic, Regime::kSeqDynamic}) {
    CHECK(train::parse_regime(train::to_string(r)) == r);
  }
  CHECK(train::to_string(Regime::kSeqDynamic) == "seq-dynamic");
  CHECK(train::is_curriculum(Regime::kSeqStatic));
  CHECK_FALSE(train::is_curriculum(Regime::kPointwise));
  CHECK_THROWS_AS(train::parse_regime("adaptive"), ConfigError);
}

TEST_CASE("option validation") {
  TrainOptions o = small_options(Regime::kUniform);
  CHECK_NOTHROW(o.validate());
  o.nr = 0;
  CHECK_THROWS_AS(o.validate(), ConfigError);
  o = small_options(Regime::kUniform);
  o.dynamic_alpha = 2.0;
  CHECK_THROWS_AS(o.validate(), ConfigError);
  o = small_options(Regime::kUniform);
  o.layer_sizes = {3, 4, 1};
  CHECK_THROWS_AS(o.validate(), ConfigError);
}

TEST_CASE("zero iterations returns the initial network") {
  const StefanConfig cfg;
  TrainOptions o = small_options(Regime::kUniform);
  o.iterations = 0;
  o.seed = 42;
  const auto r = train::train(cfg, o);
  const nn::Mlp init = nn::xavier_init(kSmall, sampling::derive_seed(42, 10));
  CHECK(r.net.flat() == init.flat());
  REQUIRE(r.history.size() == 1);
  CHECK(r.history[0].iteration == 0);
  CHECK(std::isnan(r.history[0].rel_l2));
}

TEST_CASE("training is deterministic and reduces the loss") {
  const StefanConfig cfg;
  for (Regime reg : {Regime::kUniform, Regime::kStatic, Regime::kDynamic, Regime::kPointwise}) {
    CAPTURE(train::to_string(reg));
    TrainOptions o = small_options(reg);
    o.dynamic_every = 10;
    o.seed = 7;
    const auto a = train::train(cfg, o);
    const auto b = train::train(cfg, o);
    REQUIRE(a.history.size() == 4);
    REQUIRE(b.history.size() == 4);
    for (std::size_t i = 0; i < a.history.size(); ++i) {
      const auto& x = a.history[i];
      const auto& y = b.history[i];
      CHECK(x.iteration == static_cast<long>(10 * i));
      CHECK(same_bits(x.l_r, y.l_r));
      CHECK(same_bits(x.l_0, y.l_0));
      CHECK(same_bits(x.l_b, y.l_b));
      CHECK(same_bits(x.omega_0, y.omega_0));
      CHECK(same_bits(x.lr, y.lr));
    }
    CHECK(a.net.flat() == b.net.flat());
    const auto& first = a.history.front();
    const auto& last = a.history.back();
    CHECK(last.l_0 + last.l_b < first.l_0 + first.l_b);
    if (reg == Regime::kStatic) CHECK(last.omega_0 == 100.0);
    if (reg == Regime::kUniform) CHECK(last.omega_0 == 1.0);
    if (reg == Regime::kDynamic) {
      CHECK(a.history[0].omega_0 == 1.0);
      CHECK(a.history[1].omega_0 != 1.0);  // updated at iteration 10
      CHECK(last.omega_r == 1.0);
    }
    if (reg == Regime::kPointwise) {
      REQUIRE(a.point_weights.has_value());
      CHECK(last.omega_b == 1.0);
      CHECK(last.omega_0 > 0.0);
    }
    o.seed = 8;
    const auto c = train::train(cfg, o);
    CHECK_FALSE(same_bits(c.history.back().l_r, a.history.back().l_r));
  }
}

TEST_CASE("history file round trip") {
  const StefanConfig cfg;
  TrainOptions o = small_options(Regime::kDynamic);
  const auto r = train::train(cfg, o, [](const nn::Mlp&, double t_end) { return t_end / 4; });
  const auto path = std::filesystem::temp_directory_path() / "stefan_history_test.csv";
  train::write_history(path, r.history);
  const auto back = train::read_history(path);
  REQUIRE(back.size() == r.history.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].iteration == r.history[i].iteration);
    CHECK(same_bits(back[i].l_r, r.history[i].l_r));
    CHECK(same_bits(back[i].omega_0, r.history[i].omega_0));
    CHECK(back[i].rel_l2 == 0.25);
  }
  std::filesystem::remove(path);
}

TEST_CASE("non-finite loss is reported with its iteration") {
  const StefanConfig cfg;
  TrainOptions o = small_options(Regime::kUniform);
  o.lr.eta = 1e300;
  o.lr.gamma = 1.0;
  try {
    (void)train::train(cfg, o);
    FAIL("expected NanLoss");
  } catch (const NanLoss& e) {
    CHECK(e.iteration() >= 1);
    CHECK(e.iteration() <= o.iterations);
  }
}

TEST_CASE("curriculum") {
  const StefanConfig cfg;
  TrainOptions o = small_options(Regime::kSeqUniform);
  o.budget = 1e4;
  o.history_every = 50;
  std::vector<double> seen;
  const auto r = train::train(cfg, o, [&](const nn::Mlp&, double t_end) {
    seen.push_back(t_end);
    return 0.5;
  });
  const auto sched = sampling::build_curriculum(cfg, 0.05, 1000, 500, 1e4);
  REQUIRE(r.stages.size() == 19);
  long total = 0;
  for (std::size_t i = 0; i < 19; ++i) {
    total += sched.stages[i].n_iterations;
    CHECK(r.stages[i].k == static_cast<int>(i + 1));
    CHECK(r.stages[i].iterations_end == total);
    CHECK(r.stages[i].t_end == sched.stages[i].t_end);
    CHECK(r.stages[i].rel_l2 == 0.5);
  }
  CHECK(r.stages.back().t_end == cfg.t1);
  CHECK(r.iterations == total);
  CHECK(r.history.back().iteration == total);
  CHECK(r.history.front().lr == o.lr.rate(0));
  CHECK(r.history.back().lr == o.lr.rate(static_cast<double>(total)));
  CHECK(std::count(seen.begin(), seen.end(), cfg.t1) >= 1);

  SUBCASE("loss threshold ends stages early") {
    o.stage_loss_threshold = 1e9;
    const auto early = train::train(cfg, o);
    REQUIRE(early.stages.size() == 19);
    CHECK(early.iterations == 19);
    CHECK(early.stages[4].iterations_end == 5);
  }
  SUBCASE("deterministic") {
    o.regime = Regime::kSeqDynamic;
    o.dynamic_every = 20;
    const auto a = train::train(cfg, o);
    const auto b = train::train(cfg, o);
    CHECK(a.net.flat() == b.net.flat());
  }
}
