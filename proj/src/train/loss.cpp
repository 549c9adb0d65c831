#include "stefan/train/loss.hpp"

#include <cmath>
#include <random>

#include "stefan/core/errors.hpp"
#include "stefan/core/regularization.hpp"

namespace stefan::train {

using nn::Channels;
using nn::Jet2;

double residual(const Jet2& u, const StefanConfig& cfg) {
  const double c = 1.0 + phi_delta_prime(u.v, cfg.delta) / cfg.ste;
  return c * u.dt - cfg.fo * u.dxx;
}

double residual(const nn::Mlp& net, const StefanConfig& cfg, double t, double x) {
  return residual(nn::forward_jet(net, t, x), cfg);
}

double mask(double w, const MaskParams& p) { return p.alpha / (1.0 + std::exp(-p.beta * (w - p.m))); }

double mask_prime(double w, const MaskParams& p) {
  const double e = std::exp(-p.beta * (w - p.m));
  return p.alpha * p.beta * e / ((1.0 + e) * (1.0 + e));
}

PointWeights init_point_weights(std::size_t n_init, std::size_t n_res, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PointWeights pw;
  pw.w_init.resize(n_init);
  pw.w_res.resize(n_res);
  for (double& w : pw.w_init) w = unit(rng);
  for (double& w : pw.w_res) w = unit(rng);
  return pw;
}

TrainingPoints view(const sampling::SampleSet& s) {
  return {s.initial_t, s.initial_x, s.initial_target, s.boundary_t, s.boundary_x,
          s.boundary_target, s.residual_t, s.residual_x};
}

namespace {

void check_points(const TrainingPoints& p, const PointWeights* pw) {
  if (p.init_t.size() != p.init_x.size() || p.init_t.size() != p.init_target.size() ||
      p.bnd_t.size() != p.bnd_x.size() || p.bnd_t.size() != p.bnd_target.size() ||
      p.res_t.size() != p.res_x.size()) {
    throw ConfigError("training point arrays differ in length");
  }
  if (p.init_t.empty() || p.res_t.empty()) {
    throw ConfigError("initial and residual families need at least one point");
  }
  if (pw && (pw->w_init.size() < p.init_t.size() || pw->w_res.size() < p.res_t.size())) {
    throw ConfigError("fewer point weights than points");
  }
}

// Mean of q_i (u_i - target_i)^2 with adjoints; q from an optional mask.
nn::ChunkSeed data_seed(std::span<const double> target, const std::vector<double>* w,
                        const MaskParams* mp, std::vector<double>* d_w) {
  const double inv = 1.0 / static_cast<double>(target.size());
  return [=](std::size_t begin, std::span<const Jet2> out, std::span<Jet2> adj) {
    double sum = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const std::size_t j = begin + i;
      const double e = out[i].v - target[j];
      const double q = w ? mask((*w)[j], *mp) : 1.0;
      sum += q * e * e;
      adj[i] = {2.0 * q * e * inv, 0.0, 0.0, 0.0};
      if (d_w) (*d_w)[j] = mask_prime((*w)[j], *mp) * e * e * inv;
    }
    return sum * inv;
  };
}

nn::ChunkSeed residual_seed(const StefanConfig& cfg, std::size_t n, const std::vector<double>* w,
                            const MaskParams* mp, std::vector<double>* d_w) {
  const double inv = 1.0 / static_cast<double>(n);
  return [=, &cfg](std::size_t begin, std::span<const Jet2> out, std::span<Jet2> adj) {
    double sum = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const std::size_t j = begin + i;
      const Jet2& u = out[i];
      const double p1 = phi_delta_prime(u.v, cfg.delta) / cfg.ste;
      const double p2 = phi_delta_second(u.v, cfg.delta) / cfg.ste;
      const double c = 1.0 + p1;
      const double r = c * u.dt - cfg.fo * u.dxx;
      const double q = w ? mask((*w)[j], *mp) : 1.0;
      sum += q * r * r;
      const double f = 2.0 * q * r * inv;
      adj[i] = {f * p2 * u.dt, f * c, 0.0, -f * cfg.fo};
      if (d_w) (*d_w)[j] = mask_prime((*w)[j], *mp) * r * r * inv;
    }
    return sum * inv;
  };
}

}  // namespace

TermGradients term_gradients(nn::BatchEngine& engine, const nn::Mlp& net, const StefanConfig& cfg,
                             const TrainingPoints& p, const PointWeights* pw) {
  check_points(p, pw);
  TermGradients tg{{}, nn::ParamGrad(net), nn::ParamGrad(net), nn::ParamGrad(net), {}, {}};
  if (pw) {
    tg.d_w_init.assign(p.init_t.size(), 0.0);
    tg.d_w_res.assign(p.res_t.size(), 0.0);
  }
  tg.loss.l_r = engine.accumulate(
      net, p.res_t, p.res_x, Channels::kJet,
      residual_seed(cfg, p.res_t.size(), pw ? &pw->w_res : nullptr, pw ? &pw->res_mask : nullptr,
                    pw ? &tg.d_w_res : nullptr),
      tg.g_r);
  tg.loss.l_0 = engine.accumulate(
      net, p.init_t, p.init_x, Channels::kValue,
      data_seed(p.init_target, pw ? &pw->w_init : nullptr, pw ? &pw->init_mask : nullptr,
                pw ? &tg.d_w_init : nullptr),
      tg.g_0);
  tg.loss.l_b = engine.accumulate(net, p.bnd_t, p.bnd_x, Channels::kValue,
                                  data_seed(p.bnd_target, nullptr, nullptr, nullptr), tg.g_b);
  return tg;
}

namespace {

LossBreakdown raw_terms(const nn::Mlp& net, const StefanConfig& cfg, const TrainingPoints& p,
                        const PointWeights* pw) {
  check_points(p, pw);
  nn::BatchEngine engine;
  std::vector<Jet2> jets(p.res_t.size());
  engine.jets(net, p.res_t, p.res_x, jets);
  LossBreakdown lb;
  for (std::size_t i = 0; i < jets.size(); ++i) {
    const double r = residual(jets[i], cfg);
    lb.l_r += (pw ? mask(pw->w_res[i], pw->res_mask) : 1.0) * r * r;
  }
  lb.l_r /= static_cast<double>(jets.size());

  std::vector<double> vals(p.init_t.size());
  engine.values(net, p.init_t, p.init_x, vals);
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const double e = vals[i] - p.init_target[i];
    lb.l_0 += (pw ? mask(pw->w_init[i], pw->init_mask) : 1.0) * e * e;
  }
  lb.l_0 /= static_cast<double>(vals.size());

  vals.resize(p.bnd_t.size());
  engine.values(net, p.bnd_t, p.bnd_x, vals);
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const double e = vals[i] - p.bnd_target[i];
    lb.l_b += e * e;
  }
  if (!vals.empty()) lb.l_b /= static_cast<double>(vals.size());
  return lb;
}

}  // namespace

LossBreakdown assemble_loss(const nn::Mlp& net, const StefanConfig& cfg, const TrainingPoints& p,
                            const ScalarWeights& w) {
  LossBreakdown lb = raw_terms(net, cfg, p, nullptr);
  lb.weighted_total = w.w0 * lb.l_0 + w.wb * lb.l_b + w.wr * lb.l_r;
  return lb;
}

LossBreakdown assemble_loss(const nn::Mlp& net, const StefanConfig& cfg, const TrainingPoints& p,
                            const PointWeights& w) {
  LossBreakdown lb = raw_terms(net, cfg, p, &w);
  lb.weighted_total = lb.l_0 + lb.l_b + lb.l_r;
  return lb;
}

}  // namespace stefan::train
