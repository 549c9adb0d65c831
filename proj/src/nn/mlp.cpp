#include "stefan/nn/mlp.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "stefan/core/csv.hpp"
#include "stefan/core/errors.hpp"

namespace stefan::nn {

ParamBuffer::ParamBuffer(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw ConfigError("a network needs at least input and output sizes");
  Eigen::Index total = 0;
  for (std::size_t k = 0; k + 1 < sizes_.size(); ++k) {
    if (sizes_[k] <= 0 || sizes_[k + 1] <= 0) throw ConfigError("layer widths must be positive");
    offsets_.push_back(total);
    total += static_cast<Eigen::Index>(sizes_[k + 1]) * (sizes_[k] + 1);
  }
  flat_ = Eigen::VectorXd::Zero(total);
}

ParamBuffer::MatrixMap ParamBuffer::weight(int k) {
  return {flat_.data() + offsets_[k], sizes_[k + 1], sizes_[k]};
}
ParamBuffer::ConstMatrixMap ParamBuffer::weight(int k) const {
  return {flat_.data() + offsets_[k], sizes_[k + 1], sizes_[k]};
}
ParamBuffer::VectorMap ParamBuffer::bias(int k) {
  return {flat_.data() + offsets_[k] + static_cast<Eigen::Index>(sizes_[k + 1]) * sizes_[k],
          sizes_[k + 1]};
}
ParamBuffer::ConstVectorMap ParamBuffer::bias(int k) const {
  return {flat_.data() + offsets_[k] + static_cast<Eigen::Index>(sizes_[k + 1]) * sizes_[k],
          sizes_[k + 1]};
}

Mlp::Mlp(std::vector<int> layer_sizes) : ParamBuffer(std::move(layer_sizes)) {}

std::vector<int> default_layer_sizes() { return {2, 20, 20, 20, 20, 20, 20, 1}; }

Mlp xavier_init(const std::vector<int>& layer_sizes, std::uint64_t seed) {
  Mlp net(layer_sizes);
  std::mt19937_64 rng(seed);
  for (int k = 0; k < net.depth(); ++k) {
    const double fan_in = layer_sizes[k];
    const double fan_out = layer_sizes[k + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    auto w = net.weight(k);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = dist(rng);
  }
  return net;
}

namespace {

template <class T>
T evaluate(const Mlp& net, T t, T x) {
  std::vector<T> a{t, x};
  std::vector<T> z;
  for (int k = 0; k < net.depth(); ++k) {
    const auto w = net.weight(k);
    const auto b = net.bias(k);
    z.assign(static_cast<std::size_t>(w.rows()), T{});
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      T acc = T{} + b(i);
      for (Eigen::Index j = 0; j < w.cols(); ++j) acc = acc + w(i, j) * a[j];
      z[i] = k + 1 < net.depth() ? tanh(acc) : acc;
    }
    a.swap(z);
  }
  return a[0];
}

}  // namespace

double forward(const Mlp& net, double t, double x) { return evaluate<double>(net, t, x); }

Jet2 forward_jet(const Mlp& net, double t, double x) {
  return evaluate<Jet2>(net, Jet2::time(t), Jet2::space(x));
}

void save_checkpoint(std::ostream& out, const Mlp& net) {
  out << "stefan-mlp 1\nlayers";
  for (int s : net.layer_sizes()) out << ' ' << s;
  out << '\n';
  for (Eigen::Index i = 0; i < net.size(); ++i) out << format_double(net.flat()(i)) << '\n';
}

void save_checkpoint(const std::filesystem::path& path, const Mlp& net) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  save_checkpoint(out, net);
}

Mlp load_checkpoint(std::istream& in) {
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "stefan-mlp") throw std::runtime_error("not a stefan-mlp checkpoint");
  if (version != 1) throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  std::string tag;
  in >> tag;
  if (tag != "layers") throw std::runtime_error("checkpoint missing layers line");
  std::string rest;
  std::getline(in, rest);
  std::istringstream ls(rest);
  std::vector<int> sizes;
  for (int s; ls >> s;) sizes.push_back(s);
  Mlp net(sizes);
  std::string token;
  for (Eigen::Index i = 0; i < net.size(); ++i) {
    if (!(in >> token)) throw std::runtime_error("checkpoint truncated");
    net.flat()(i) = parse_double(token);
  }
  if (in >> token) throw std::runtime_error("trailing data in checkpoint");
  return net;
}

Mlp load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  return load_checkpoint(in);
}

}  // namespace stefan::nn
