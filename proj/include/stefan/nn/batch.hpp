#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "stefan/nn/jet.hpp"
#include "stefan/nn/mlp.hpp"

namespace stefan::nn {

/// What a batch pass propagates: the value alone, or the full input jet.
enum class Channels { kValue = 1, kJet = 4 };

/// Produces loss adjoints for one chunk of outputs. `begin` is the index of
/// the chunk's first point in the whole batch. The callback writes
/// d(loss)/d(output component) into `adjoint` (only `.v` is read in value
/// mode) and returns the chunk's contribution to the loss.
using ChunkSeed = std::function<double(std::size_t begin, std::span<const Jet2> out,
                                       std::span<Jet2> adjoint)>;

/// Batched forward/reverse evaluation of an Mlp over many points.
///
/// Points are processed in fixed-size chunks in index order; each layer is a
/// dense product over all channels of the chunk at once. Gradient
/// accumulation order depends only on the batch order, so results are
/// reproducible bit for bit.
class BatchEngine {
 public:
  explicit BatchEngine(int chunk_size = 128);

  /// Network values at each (t[i], x[i]).
  void values(const Mlp& net, std::span<const double> t, std::span<const double> x,
              std::span<double> out);

  /// Output jets at each point.
  void jets(const Mlp& net, std::span<const double> t, std::span<const double> x,
            std::span<Jet2> out);

  /// Forward + reverse sweep. Adds d(loss)/d(params) into `grad` and returns
  /// the summed loss reported by `seed`.
  double accumulate(const Mlp& net, std::span<const double> t, std::span<const double> x,
                    Channels channels, const ChunkSeed& seed, ParamGrad& grad);

 private:
  void forward_chunk(const Mlp& net, const double* t, const double* x, int m, int channels);
  void backward_chunk(const Mlp& net, int m, int channels, ParamGrad& grad);

  int chunk_;
  // Per layer: activations a_[k] (input of affine map k), pre-activations z_[k]
  // and tanh values s_[k] of the hidden layers.
  std::vector<Eigen::MatrixXd> a_, z_, s_;
  Eigen::MatrixXd g_, ga_;
  Eigen::ArrayXd tanh_buf_;
  std::vector<Jet2> out_, adj_;
};

/// Loss over the output jets of a whole batch: fills d(loss)/d(output) for
/// every point and returns the loss.
using BatchLoss = std::function<double(std::span<const Jet2> out, std::span<Jet2> adjoint)>;

struct LossAndGrad {
  double loss = 0.0;
  ParamGrad grad;
};

/// Gradient with respect to every network parameter of a scalar loss built
/// from output jets at the given points.
LossAndGrad loss_param_grad(const Mlp& net, std::span<const double> t,
                            std::span<const double> x, const BatchLoss& loss);

}  // namespace stefan::nn
