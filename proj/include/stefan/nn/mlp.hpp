#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "stefan/nn/jet.hpp"

namespace stefan::nn {

/// Flat parameter storage with per-layer views. Layer k holds its weight
/// matrix (out x in, column-major) followed by its bias vector.
class ParamBuffer {
 public:
  using MatrixMap = Eigen::Map<Eigen::MatrixXd>;
  using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;
  using VectorMap = Eigen::Map<Eigen::VectorXd>;
  using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

  ParamBuffer() = default;
  explicit ParamBuffer(std::vector<int> layer_sizes);

  const std::vector<int>& layer_sizes() const noexcept { return sizes_; }
  /// Number of affine maps (layer_sizes().size() - 1).
  int depth() const noexcept { return static_cast<int>(sizes_.size()) - 1; }
  Eigen::Index size() const noexcept { return flat_.size(); }

  MatrixMap weight(int k);
  ConstMatrixMap weight(int k) const;
  VectorMap bias(int k);
  ConstVectorMap bias(int k) const;

  Eigen::VectorXd& flat() noexcept { return flat_; }
  const Eigen::VectorXd& flat() const noexcept { return flat_; }

  bool same_shape(const ParamBuffer& other) const noexcept { return sizes_ == other.sizes_; }

 private:
  std::vector<int> sizes_;
  std::vector<Eigen::Index> offsets_;
  Eigen::VectorXd flat_;
};

/// Fully connected network: tanh on hidden layers, identity on the output.
class Mlp : public ParamBuffer {
 public:
  Mlp() = default;
  /// Zero-initialized network. Throws ConfigError on fewer than two sizes or
  /// a non-positive width.
  explicit Mlp(std::vector<int> layer_sizes);
};

/// Gradient slots shaped like an Mlp, zero-initialized.
class ParamGrad : public ParamBuffer {
 public:
  ParamGrad() = default;
  explicit ParamGrad(const ParamBuffer& shape) : ParamBuffer(shape.layer_sizes()) {}
  void set_zero() { flat().setZero(); }
};

/// 2 -> 20 x 6 -> 1.
std::vector<int> default_layer_sizes();

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
Mlp xavier_init(const std::vector<int>& layer_sizes, std::uint64_t seed);

/// Plain forward pass at (t, x).
double forward(const Mlp& net, double t, double x);

/// Forward pass carrying input jets. The value channel is computed with the
/// same operation sequence as forward(), so the two agree bit for bit.
Jet2 forward_jet(const Mlp& net, double t, double x);

/// Text checkpoint: "stefan-mlp 1", a "layers" line, then one parameter per
/// line in shortest round-trip decimal form.
void save_checkpoint(std::ostream& out, const Mlp& net);
void save_checkpoint(const std::filesystem::path& path, const Mlp& net);
/// Throws std::runtime_error on a bad header, version or count.
Mlp load_checkpoint(std::istream& in);
Mlp load_checkpoint(const std::filesystem::path& path);

}  // namespace stefan::nn
