#include <cmath>
#include <string>

#include "sgn/errors.hpp"
#include "sgn/layers.hpp"

namespace sgn {

MlpParams mlp_init(std::size_t d_in, std::size_t d_ff, std::size_t d_out, Activation act,
                   Rng& rng) {
  if (d_in == 0 || d_ff == 0 || d_out == 0) {
    throw ParameterError("mlp_init: all dimensions must be positive");
  }
  MlpParams p;
  p.activation = act;
  p.w1 = DenseMatrix(d_ff, d_in);
  for (double& w : p.w1.values()) w = rng.gaussian(0.0, 1.0 / std::sqrt(double(d_in)));
  p.b1.assign(d_ff, 0.0);
  p.w2 = DenseMatrix(d_out, d_ff);
  for (double& w : p.w2.values()) w = rng.gaussian(0.0, 1.0 / std::sqrt(double(d_ff)));
  p.b2.assign(d_out, 0.0);
  return p;
}

MlpForward mlp_forward(std::span<const double> x, const MlpParams& p) {
  if (x.size() != p.d_in()) {
    throw ShapeError("mlp_forward: expected input length " + std::to_string(p.d_in()) +
                     ", got " + std::to_string(x.size()));
  }
  MlpForward f;
  f.cache.x.assign(x.begin(), x.end());
  f.cache.u = matvec(p.w1, x);
  f.cache.h.resize(f.cache.u.size());
  f.cache.dphi.resize(f.cache.u.size());
  for (std::size_t k = 0; k < f.cache.u.size(); ++k) {
    f.cache.u[k] += p.b1[k];
    const ActivationValue a = activate_with_prime(p.activation, f.cache.u[k]);
    f.cache.h[k] = a.value;
    f.cache.dphi[k] = a.prime;
  }
  f.y = matvec(p.w2, f.cache.h);
  for (std::size_t i = 0; i < f.y.size(); ++i) f.y[i] += p.b2[i];
  return f;
}

MlpGrads zero_grads(const MlpParams& p) {
  MlpGrads g;
  g.w1 = DenseMatrix(p.w1.rows(), p.w1.cols());
  g.b1.assign(p.b1.size(), 0.0);
  g.w2 = DenseMatrix(p.w2.rows(), p.w2.cols());
  g.b2.assign(p.b2.size(), 0.0);
  g.x.assign(p.d_in(), 0.0);
  return g;
}

MlpGrads mlp_backward(std::span<const double> upstream, const MlpCache& c, const MlpParams& p) {
  MlpGrads g = zero_grads(p);
  mlp_backward_accumulate(upstream, c, p, g);
  return g;
}

void mlp_backward_accumulate(std::span<const double> upstream, const MlpCache& c,
                             const MlpParams& p, MlpGrads& g) {
  if (upstream.size() != p.d_out() || c.u.size() != p.d_ff() || c.dphi.size() != p.d_ff()) {
    throw ShapeError("mlp_backward: upstream/cache do not match parameters");
  }
  for (std::size_t i = 0; i < p.d_out(); ++i) {
    auto row = g.w2.row(i);
    for (std::size_t k = 0; k < p.d_ff(); ++k) row[k] += upstream[i] * c.h[k];
    g.b2[i] += upstream[i];
  }
  const Vec grad_h = matvec_transposed(p.w2, upstream);
  Vec grad_u(p.d_ff());
  for (std::size_t k = 0; k < p.d_ff(); ++k) {
    grad_u[k] = grad_h[k] * c.dphi[k];
    auto row = g.w1.row(k);
    for (std::size_t i = 0; i < c.x.size(); ++i) row[i] += grad_u[k] * c.x[i];
    g.b1[k] += grad_u[k];
  }
  g.x = matvec_transposed(p.w1, grad_u);
}

MlpParams base_mlp(const SgnParams& p) {
  return MlpParams{p.w1, p.b1, p.w2, p.b2, p.activation};
}

}  // namespace sgn
