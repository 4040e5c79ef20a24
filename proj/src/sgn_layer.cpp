#include <algorithm>
#include <cmath>
#include <string>

#include "sgn/errors.hpp"
#include "sgn/layers.hpp"

namespace sgn {
namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

bool uses_gate(SpectralBranch b) {
  return b == SpectralBranch::Gated || b == SpectralBranch::PureSpectral;
}

bool uses_base(SpectralBranch b) { return b != SpectralBranch::PureSpectral; }

double fixed_multiplier(SpectralBranch b) {
  return b == SpectralBranch::FixedGate ? kFixedGateValue : 1.0;
}

void check_input(std::span<const double> v, std::size_t expected, const char* what) {
  if (v.size() != expected) {
    throw ShapeError(std::string(what) + ": expected length " + std::to_string(expected) +
                     ", got " + std::to_string(v.size()));
  }
}

// Multiplier applied to Psi on each channel: G(u) or a constant.
Vec spectral_multiplier(const SgnParams& p, const Vec& g) {
  if (uses_gate(p.branch)) return g;
  return Vec(p.d_ff(), fixed_multiplier(p.branch));
}

}  // namespace

LayerNormStats layer_norm(std::span<const double> u, std::span<const double> gamma,
                          std::span<const double> beta) {
  const std::size_t d = u.size();
  LayerNormStats s;
  double mean = 0.0;
  for (double v : u) mean += v;
  mean /= static_cast<double>(d);
  double var = 0.0;
  for (double v : u) var += (v - mean) * (v - mean);
  var /= static_cast<double>(d);
  s.mean = mean;
  s.inv_std = 1.0 / std::sqrt(var + kLayerNormEps);
  s.normalized.resize(d);
  s.output.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    s.normalized[i] = (u[i] - mean) * s.inv_std;
    s.output[i] = gamma[i] * s.normalized[i] + beta[i];
  }
  return s;
}

Vec gate(std::span<const double> u, const SgnParams& p) {
  check_input(u, p.d_ff(), "gate");
  const LayerNormStats ln = layer_norm(u, p.ln_gamma, p.ln_beta);
  Vec g(u.size());
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = sigmoid(p.wg[k] * ln.output[k] + p.bg[k]);
  return g;
}

Vec spectral_projection(std::span<const double> u, const SgnParams& p) {
  check_input(u, p.d_ff(), "spectral_projection");
  return matvec_transposed(p.ar, rff_features(u, p.rff));
}

Vec sgn_activation(std::span<const double> u, const SgnParams& p) {
  check_input(u, p.d_ff(), "sgn_activation");
  const Vec psi = spectral_projection(u, p);
  const Vec mult = spectral_multiplier(p, uses_gate(p.branch) ? gate(u, p) : Vec{});
  const bool base = uses_base(p.branch);
  Vec t(u.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double phi = base ? activate(p.activation, u[k]) : 0.0;
    t[k] = phi + mult[k] * psi[k];
  }
  return t;
}

SgnForward sgn_forward(std::span<const double> x, const SgnParams& p) {
  check_input(x, p.d_in(), "sgn_forward");
  SgnForward f;
  SgnCache& c = f.cache;
  c.x.assign(x.begin(), x.end());
  c.u = matvec(p.w1, x);
  for (std::size_t k = 0; k < c.u.size(); ++k) c.u[k] += p.b1[k];

  c.ln = layer_norm(c.u, p.ln_gamma, p.ln_beta);
  c.gate.resize(c.u.size());
  for (std::size_t k = 0; k < c.u.size(); ++k) {
    c.gate[k] = sigmoid(p.wg[k] * c.ln.output[k] + p.bg[k]);
  }

  c.theta = rff_phases(c.u, p.rff);
  const std::size_t m = c.theta.size();
  const double s = p.rff.feature_scale();
  c.features.resize(2 * m);
  for (std::size_t j = 0; j < m; ++j) {
    c.features[j] = s * std::cos(c.theta[j]);
    c.features[m + j] = s * std::sin(c.theta[j]);
  }
  c.psi = matvec_transposed(p.ar, c.features);

  const Vec mult = spectral_multiplier(p, c.gate);
  const bool base = uses_base(p.branch);
  c.t.resize(c.u.size());
  c.dphi.assign(c.u.size(), 0.0);
  for (std::size_t k = 0; k < c.u.size(); ++k) {
    double phi = 0.0;
    if (base) {
      const ActivationValue a = activate_with_prime(p.activation, c.u[k]);
      phi = a.value;
      c.dphi[k] = a.prime;
    }
    c.t[k] = phi + mult[k] * c.psi[k];
  }

  f.y = matvec(p.w2, c.t);
  for (std::size_t i = 0; i < f.y.size(); ++i) f.y[i] += p.b2[i];
  return f;
}

SgnGrads zero_grads(const SgnParams& p) {
  SgnGrads g;
  g.w1 = DenseMatrix(p.w1.rows(), p.w1.cols());
  g.b1.assign(p.b1.size(), 0.0);
  g.wr = DenseMatrix(p.rff.wr.rows(), p.rff.wr.cols());
  g.br.assign(p.rff.br.size(), 0.0);
  g.ar = DenseMatrix(p.ar.rows(), p.ar.cols());
  g.wg.assign(p.wg.size(), 0.0);
  g.bg.assign(p.bg.size(), 0.0);
  g.ln_gamma.assign(p.ln_gamma.size(), 0.0);
  g.ln_beta.assign(p.ln_beta.size(), 0.0);
  g.w2 = DenseMatrix(p.w2.rows(), p.w2.cols());
  g.b2.assign(p.b2.size(), 0.0);
  g.x.assign(p.d_in(), 0.0);
  return g;
}

SgnGrads sgn_backward(std::span<const double> upstream, const SgnCache& c, const SgnParams& p) {
  SgnGrads g = zero_grads(p);
  sgn_backward_accumulate(upstream, c, p, g);
  return g;
}

void sgn_backward_accumulate(std::span<const double> upstream, const SgnCache& c,
                             const SgnParams& p, SgnGrads& g) {
  check_input(upstream, p.d_out(), "sgn_backward");
  if (c.u.size() != p.d_ff() || c.theta.size() != p.budget() || c.dphi.size() != p.d_ff()) {
    throw ShapeError("sgn_backward: cache does not match parameters");
  }
  const std::size_t d_ff = p.d_ff();
  const std::size_t m = p.budget();

  // y = W2 t + b2
  for (std::size_t i = 0; i < p.d_out(); ++i) {
    auto row = g.w2.row(i);
    for (std::size_t k = 0; k < d_ff; ++k) row[k] += upstream[i] * c.t[k];
    g.b2[i] += upstream[i];
  }
  const Vec grad_t = matvec_transposed(p.w2, upstream);

  Vec grad_u(d_ff, 0.0);
  if (uses_base(p.branch)) {
    for (std::size_t k = 0; k < d_ff; ++k) {
      grad_u[k] = grad_t[k] * c.dphi[k];
    }
  }

  const Vec mult = spectral_multiplier(p, c.gate);
  Vec grad_psi(d_ff);
  for (std::size_t k = 0; k < d_ff; ++k) grad_psi[k] = grad_t[k] * mult[k];

  // psi = A_r^T features
  for (std::size_t l = 0; l < 2 * m; ++l) {
    auto row = g.ar.row(l);
    for (std::size_t k = 0; k < d_ff; ++k) row[k] += c.features[l] * grad_psi[k];
  }
  const Vec grad_features = matvec(p.ar, grad_psi);

  // features = s [cos theta ; sin theta]
  const double s = p.rff.feature_scale();
  Vec grad_theta(m);
  for (std::size_t j = 0; j < m; ++j) {
    grad_theta[j] = s * (-std::sin(c.theta[j]) * grad_features[j] +
                         std::cos(c.theta[j]) * grad_features[m + j]);
  }
  for (std::size_t i = 0; i < d_ff; ++i) {
    auto row = g.wr.row(i);
    for (std::size_t j = 0; j < m; ++j) row[j] += c.u[i] * grad_theta[j];
  }
  if (p.rff.scale == RffScale::Layer) {
    for (std::size_t j = 0; j < m; ++j) g.br[j] += grad_theta[j];
  }
  const Vec grad_u_rff = matvec(p.rff.wr, grad_theta);
  for (std::size_t k = 0; k < d_ff; ++k) grad_u[k] += grad_u_rff[k];

  if (uses_gate(p.branch)) {
    // gate = sigmoid(w_g * ln + b_g), ln = gamma * n + beta
    Vec grad_norm(d_ff);
    for (std::size_t k = 0; k < d_ff; ++k) {
      const double gk = c.gate[k];
      const double grad_z = grad_t[k] * c.psi[k] * gk * (1.0 - gk);
      g.wg[k] += grad_z * c.ln.output[k];
      g.bg[k] += grad_z;
      const double grad_ln = grad_z * p.wg[k];
      g.ln_gamma[k] += grad_ln * c.ln.normalized[k];
      g.ln_beta[k] += grad_ln;
      grad_norm[k] = grad_ln * p.ln_gamma[k];
    }
    double mean_g = 0.0;
    double mean_gn = 0.0;
    for (std::size_t k = 0; k < d_ff; ++k) {
      mean_g += grad_norm[k];
      mean_gn += grad_norm[k] * c.ln.normalized[k];
    }
    mean_g /= static_cast<double>(d_ff);
    mean_gn /= static_cast<double>(d_ff);
    for (std::size_t k = 0; k < d_ff; ++k) {
      grad_u[k] += c.ln.inv_std * (grad_norm[k] - mean_g - c.ln.normalized[k] * mean_gn);
    }
  }

  // u = W1 x + b1
  for (std::size_t k = 0; k < d_ff; ++k) {
    auto row = g.w1.row(k);
    for (std::size_t i = 0; i < c.x.size(); ++i) row[i] += grad_u[k] * c.x[i];
    g.b1[k] += grad_u[k];
  }
  g.x = matvec_transposed(p.w1, grad_u);
}

JacobianTerms sgn_jacobian_terms(std::span<const double> u, const SgnParams& p) {
  check_input(u, p.d_ff(), "sgn_jacobian_terms");
  const std::size_t d = p.d_ff();
  JacobianTerms j{DenseMatrix(d, d), DenseMatrix(d, d), DenseMatrix(d, d)};

  if (uses_base(p.branch)) {
    for (std::size_t k = 0; k < d; ++k) j.base(k, k) = activate_prime(p.activation, u[k]);
  }

  const Vec g = gate(u, p);
  const Vec mult = spectral_multiplier(p, g);
  // J_Psi = A_r^T J_gamma
  const DenseMatrix j_gamma = rff_feature_jacobian(u, p.rff);
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < d; ++i) {
      double acc = 0.0;
      for (std::size_t l = 0; l < j_gamma.rows(); ++l) acc += p.ar(l, k) * j_gamma(l, i);
      j.injection(k, i) = mult[k] * acc;
    }
  }

  if (uses_gate(p.branch)) {
    const Vec psi = spectral_projection(u, p);
    const LayerNormStats ln = layer_norm(u, p.ln_gamma, p.ln_beta);
    const double inv_d = 1.0 / static_cast<double>(d);
    for (std::size_t k = 0; k < d; ++k) {
      const double dgate = g[k] * (1.0 - g[k]) * p.wg[k] * p.ln_gamma[k];
      for (std::size_t i = 0; i < d; ++i) {
        const double dnorm = ln.inv_std * ((k == i ? 1.0 : 0.0) - inv_d -
                                           ln.normalized[k] * ln.normalized[i] * inv_d);
        j.modulation(k, i) = psi[k] * dgate * dnorm;
      }
    }
  }
  return j;
}

SgnParams homotopy_init(std::size_t d_in, std::size_t d_ff, std::size_t m, std::size_t d_out,
                        const InitConfig& cfg, Rng& rng) {
  if (!(cfg.eps >= 0.0)) throw ParameterError("homotopy_init: eps must be >= 0");
  if (!(cfg.sigma > 0.0)) throw ParameterError("homotopy_init: sigma must be positive");
  if (d_in == 0 || d_ff == 0 || m == 0 || d_out == 0) {
    throw ParameterError("homotopy_init: all dimensions must be positive");
  }
  SgnParams p;
  p.activation = cfg.activation;
  p.w1 = DenseMatrix(d_ff, d_in);
  for (double& w : p.w1.values()) w = rng.gaussian(0.0, 1.0 / std::sqrt(double(d_in)));
  p.b1.assign(d_ff, 0.0);
  p.w2 = DenseMatrix(d_out, d_ff);
  for (double& w : p.w2.values()) w = rng.gaussian(0.0, 1.0 / std::sqrt(double(d_ff)));
  p.b2.assign(d_out, 0.0);
  p.rff = rff_init(d_ff, m, cfg.sigma, rng, RffScale::Layer);
  p.ar = DenseMatrix(2 * m, d_ff);
  for (double& a : p.ar.values()) a = cfg.eps * rng.gaussian(0.0, 1.0);
  p.wg.assign(d_ff, 0.0);
  p.bg.assign(d_ff, cfg.gate_bias);
  p.ln_gamma.assign(d_ff, 1.0);
  p.ln_beta.assign(d_ff, 0.0);
  return p;
}

SgnParams embed_spectral_sum(SgnParams p, std::size_t channel, std::span<const double> alpha,
                             std::span<const double> beta, double gate_bias) {
  const std::size_t m = p.budget();
  if (channel >= p.d_ff()) throw RangeError("channel " + std::to_string(channel) + " >= d_ff");
  if (alpha.size() != m || beta.size() != m) {
    throw ShapeError("alpha and beta need " + std::to_string(m) + " entries");
  }
  p.branch = SpectralBranch::Gated;
  std::fill(p.wg.begin(), p.wg.end(), 0.0);
  std::fill(p.bg.begin(), p.bg.end(), gate_bias);
  p.ar = DenseMatrix(2 * m, p.d_ff());
  for (std::size_t j = 0; j < m; ++j) {
    p.ar(j, channel) = alpha[j];
    p.ar(m + j, channel) = beta[j];
  }
  return p;
}

namespace {

ParamBlock block(std::string_view name, DenseMatrix& m) {
  return {name, m.values(), m.rows(), m.cols()};
}
ParamBlock block(std::string_view name, Vec& v) { return {name, v, v.size(), 1}; }

}  // namespace

std::vector<ParamBlock> param_blocks(SgnParams& p) {
  return {block("W1", p.w1),   block("b1", p.b1),           block("Wr", p.rff.wr),
          block("br", p.rff.br), block("Ar", p.ar),         block("wg", p.wg),
          block("bg", p.bg),   block("ln_gamma", p.ln_gamma), block("ln_beta", p.ln_beta),
          block("W2", p.w2),   block("b2", p.b2)};
}

std::vector<ParamBlock> param_blocks(SgnGrads& g) {
  return {block("W1", g.w1), block("b1", g.b1),             block("Wr", g.wr),
          block("br", g.br), block("Ar", g.ar),             block("wg", g.wg),
          block("bg", g.bg), block("ln_gamma", g.ln_gamma), block("ln_beta", g.ln_beta),
          block("W2", g.w2), block("b2", g.b2)};
}

std::vector<ParamBlock> param_blocks(MlpParams& p) {
  return {block("W1", p.w1), block("b1", p.b1), block("W2", p.w2), block("b2", p.b2)};
}

std::vector<ParamBlock> param_blocks(MlpGrads& g) {
  return {block("W1", g.w1), block("b1", g.b1), block("W2", g.w2), block("b2", g.b2)};
}

}  // namespace sgn
