#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stefan/core/config.hpp"
#include "stefan/nn/batch.hpp"
#include "stefan/nn/jet.hpp"
#include "stefan/nn/mlp.hpp"
#include "stefan/sampling/sampling.hpp"

namespace stefan::train {

/// (1 + phi_delta'(theta) / Ste) theta_t - Fo theta_xx from an output jet.
double residual(const nn::Jet2& u, const StefanConfig& cfg);
double residual(const nn::Mlp& net, const StefanConfig& cfg, double t, double x);

struct LossBreakdown {
  double l_r = 0.0;
  double l_0 = 0.0;
  double l_b = 0.0;
  double weighted_total = 0.0;
};

struct ScalarWeights {
  double w0 = 1.0;
  double wb = 1.0;
  double wr = 1.0;
};

/// Sigmoid mask  w -> alpha / (1 + exp(-beta (w - m))).
struct MaskParams {
  double alpha = 1.0;
  double beta = 1.0;
  double m = 0.0;
};

double mask(double w, const MaskParams& p);
double mask_prime(double w, const MaskParams& p);

/// Trainable per-point weights for the initial and residual families.
struct PointWeights {
  std::vector<double> w_init, w_res;
  MaskParams init_mask{1000.0, 0.1, 2.0};
  MaskParams res_mask{1.0, 1.0, 5.0};
};

/// Weights drawn from U[0, 1].
PointWeights init_point_weights(std::size_t n_init, std::size_t n_res, std::uint64_t seed);

/// Borrowed views of the three point families. The boundary family may be
/// empty (early curriculum stages), giving l_b = 0.
struct TrainingPoints {
  std::span<const double> init_t, init_x, init_target;
  std::span<const double> bnd_t, bnd_x, bnd_target;
  std::span<const double> res_t, res_x;
};

TrainingPoints view(const sampling::SampleSet& s);

/// Term values and parameter gradients of each loss term. With point
/// weights, l_0 and l_r are mask-weighted means and `d_w_init` / `d_w_res`
/// hold d(total)/d(w); otherwise the terms are plain means and those stay
/// empty. The total is never formed here.
struct TermGradients {
  LossBreakdown loss;
  nn::ParamGrad g_r, g_0, g_b;
  std::vector<double> d_w_init, d_w_res;
};

TermGradients term_gradients(nn::BatchEngine& engine, const nn::Mlp& net, const StefanConfig& cfg,
                             const TrainingPoints& pts, const PointWeights* pw = nullptr);

/// Loss values only. Scalar mode: total = w0 l_0 + wb l_b + wr l_r.
LossBreakdown assemble_loss(const nn::Mlp& net, const StefanConfig& cfg, const TrainingPoints& pts,
                            const ScalarWeights& w);
/// Pointwise mode: total = l_0 + l_b + l_r with masked l_0 and l_r.
LossBreakdown assemble_loss(const nn::Mlp& net, const StefanConfig& cfg, const TrainingPoints& pts,
                            const PointWeights& w);

}  // namespace stefan::train
