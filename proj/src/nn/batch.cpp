#include "stefan/nn/batch.hpp"

#include <algorithm>
#include <cmath>

namespace stefan::nn {

namespace {

// Elementwise tanh of n values. Rational form x + x^3 P(x^2) / Q(x^2) for
// |x| < 0.625 (Cephes coefficients), 1 - 2 / (exp(2|x|) + 1) otherwise, with
// the exponential vectorized through Eigen. Agrees with std::tanh to a few ulp.
void vector_tanh(const double* x, double* out, Eigen::Index n, Eigen::ArrayXd& buf) {
  const Eigen::Map<const Eigen::ArrayXd> xv(x, n);
  buf.resize(n);
  buf = (2.0 * xv.abs().min(40.0)).exp();
  const double* e = buf.data();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = x[i];
    const double z = v * v;
    const double p =
        (-9.64399179425052238628e-1 * z - 9.92877231001918586564e1) * z - 1.61468768441708447952e3;
    const double q =
        ((z + 1.12811678491632931402e2) * z + 2.23548839060100448583e3) * z + 4.84406305325125486048e3;
    const double small = v + v * z * p / q;
    const double big = 1.0 - 2.0 / (e[i] + 1.0);
    const double signed_big = v < 0.0 ? -big : big;
    out[i] = (v < 0.625 && v > -0.625) ? small : signed_big;
  }
}

// Hidden-layer jet channels from pre-activations: with s = tanh(z_v),
// t' = s1 z_t, x' = s1 z_x, xx' = s1 z_xx - 2 s s1 z_x^2.
void jet_forward(const double* __restrict s, const double* __restrict zt,
                 const double* __restrict zx, const double* __restrict zxx, double* __restrict nt,
                 double* __restrict nx, double* __restrict nxx, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sv = s[i];
    const double s1 = 1.0 - sv * sv;
    nt[i] = s1 * zt[i];
    nx[i] = s1 * zx[i];
    nxx[i] = s1 * zxx[i] - 2.0 * sv * s1 * (zx[i] * zx[i]);
  }
}

// Adjoint of jet_forward (plus the value channel) back to the pre-activations.
void jet_backward(const double* __restrict s, const double* __restrict zt,
                  const double* __restrict zx, const double* __restrict zxx,
                  const double* __restrict gv, const double* __restrict gt,
                  const double* __restrict gx, const double* __restrict gxx,
                  double* __restrict ov, double* __restrict ot, double* __restrict ox,
                  double* __restrict oxx, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sv = s[i];
    const double s1 = 1.0 - sv * sv;
    const double s2 = -2.0 * sv * s1;
    const double s3 = -2.0 * s1 * (s1 - 2.0 * (sv * sv));
    ov[i] = gv[i] * s1 + gt[i] * s2 * zt[i] + gx[i] * s2 * zx[i] +
            gxx[i] * (s2 * zxx[i] + s3 * (zx[i] * zx[i]));
    ot[i] = gt[i] * s1;
    ox[i] = gx[i] * s1 + 2.0 * gxx[i] * s2 * zx[i];
    oxx[i] = gxx[i] * s1;
  }
}

}  // namespace

BatchEngine::BatchEngine(int chunk_size) : chunk_(std::max(1, chunk_size)) {}

void BatchEngine::forward_chunk(const Mlp& net, const double* t, const double* x, int m,
                                int channels) {
  const int depth = net.depth();
  const Eigen::Index cols = static_cast<Eigen::Index>(m) * channels;
  a_.resize(depth + 1);
  z_.resize(depth);
  s_.resize(depth);

  auto& a0 = a_[0];
  a0.setZero(2, cols);
  for (int j = 0; j < m; ++j) {
    a0(0, j) = t[j];
    a0(1, j) = x[j];
  }
  if (channels == 4) {
    a0.row(0).segment(m, m).setOnes();      // dt seed
    a0.row(1).segment(2 * m, m).setOnes();  // dx seed
  }

  for (int k = 0; k < depth; ++k) {
    const auto w = net.weight(k);
    const auto b = net.bias(k);
    auto& z = z_[k];
    z.resize(w.rows(), cols);
    z.leftCols(m).colwise() = b;
    if (channels == 4) z.rightCols(3 * m).setZero();
    z.noalias() += w * a_[k];
    if (k + 1 == depth) {
      a_[k + 1] = z;
      continue;
    }
    const Eigen::Index block = z.rows() * m;  // one channel, contiguous
    auto& s = s_[k];
    s.resize(z.rows(), m);
    vector_tanh(z.data(), s.data(), block, tanh_buf_);
    auto& next = a_[k + 1];
    next.resize(z.rows(), cols);
    const double* sp = s.data();
    double* nv = next.data();
    std::copy_n(sp, block, nv);
    if (channels == 4) {
      const double* zt = z.data() + block;
      double* nt = nv + block;
      jet_forward(sp, zt, zt + block, zt + 2 * block, nt, nt + block, nt + 2 * block, block);
    }
  }

  out_.resize(m);
  adj_.assign(m, Jet2{});
  const auto& y = a_[depth];
  for (int j = 0; j < m; ++j) {
    out_[j].v = y(0, j);
    if (channels == 4) {
      out_[j].dt = y(0, m + j);
      out_[j].dx = y(0, 2 * m + j);
      out_[j].dxx = y(0, 3 * m + j);
    } else {
      out_[j].dt = out_[j].dx = out_[j].dxx = 0.0;
    }
  }
}

void BatchEngine::backward_chunk(const Mlp& net, int m, int channels, ParamGrad& grad) {
  const int depth = net.depth();
  const Eigen::Index cols = static_cast<Eigen::Index>(m) * channels;
  g_.resize(1, cols);
  for (int j = 0; j < m; ++j) {
    g_(0, j) = adj_[j].v;
    if (channels == 4) {
      g_(0, m + j) = adj_[j].dt;
      g_(0, 2 * m + j) = adj_[j].dx;
      g_(0, 3 * m + j) = adj_[j].dxx;
    }
  }

  for (int k = depth - 1; k >= 0; --k) {
    // g_ holds d(loss)/d(z_k) for every channel.
    grad.weight(k).noalias() += g_ * a_[k].transpose();
    grad.bias(k) += g_.leftCols(m).rowwise().sum();
    if (k == 0) break;

    ga_.noalias() = net.weight(k).transpose() * g_;  // d(loss)/d(a_k)
    const Eigen::Index block = ga_.rows() * m;
    const double* sp = s_[k - 1].data();
    g_.resize(ga_.rows(), cols);
    const double* gv = ga_.data();
    double* ov = g_.data();
    if (channels == 1) {
      for (Eigen::Index i = 0; i < block; ++i) ov[i] = gv[i] * (1.0 - sp[i] * sp[i]);
      continue;
    }
    const double* zt = z_[k - 1].data() + block;
    jet_backward(sp, zt, zt + block, zt + 2 * block, gv, gv + block, gv + 2 * block,
                 gv + 3 * block, ov, ov + block, ov + 2 * block, ov + 3 * block, block);
  }
}

void BatchEngine::values(const Mlp& net, std::span<const double> t, std::span<const double> x,
                         std::span<double> out) {
  const std::size_t n = t.size();
  for (std::size_t begin = 0; begin < n; begin += chunk_) {
    const int m = static_cast<int>(std::min<std::size_t>(chunk_, n - begin));
    forward_chunk(net, t.data() + begin, x.data() + begin, m, 1);
    for (int j = 0; j < m; ++j) out[begin + j] = out_[j].v;
  }
}

void BatchEngine::jets(const Mlp& net, std::span<const double> t, std::span<const double> x,
                       std::span<Jet2> out) {
  const std::size_t n = t.size();
  for (std::size_t begin = 0; begin < n; begin += chunk_) {
    const int m = static_cast<int>(std::min<std::size_t>(chunk_, n - begin));
    forward_chunk(net, t.data() + begin, x.data() + begin, m, 4);
    std::copy(out_.begin(), out_.begin() + m, out.begin() + static_cast<std::ptrdiff_t>(begin));
  }
}

double BatchEngine::accumulate(const Mlp& net, std::span<const double> t,
                               std::span<const double> x, Channels channels,
                               const ChunkSeed& seed, ParamGrad& grad) {
  const int c = static_cast<int>(channels);
  const std::size_t n = t.size();
  double loss = 0.0;
  for (std::size_t begin = 0; begin < n; begin += chunk_) {
    const int m = static_cast<int>(std::min<std::size_t>(chunk_, n - begin));
    forward_chunk(net, t.data() + begin, x.data() + begin, m, c);
    loss += seed(begin, std::span<const Jet2>(out_.data(), m), std::span<Jet2>(adj_.data(), m));
    backward_chunk(net, m, c, grad);
  }
  return loss;
}

LossAndGrad loss_param_grad(const Mlp& net, std::span<const double> t,
                            std::span<const double> x, const BatchLoss& loss) {
  BatchEngine engine;
  std::vector<Jet2> out(t.size());
  engine.jets(net, t, x, out);
  std::vector<Jet2> adjoint(t.size());
  LossAndGrad result;
  result.loss = loss(out, adjoint);
  result.grad = ParamGrad(net);
  engine.accumulate(
      net, t, x, Channels::kJet,
      [&](std::size_t begin, std::span<const Jet2>, std::span<Jet2> adj) {
        std::copy_n(adjoint.begin() + static_cast<std::ptrdiff_t>(begin), adj.size(), adj.begin());
        return 0.0;
      },
      result.grad);
  return result;
}

}  // namespace stefan::nn
