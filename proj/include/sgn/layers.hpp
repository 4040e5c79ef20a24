#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sgn/activations.hpp"
#include "sgn/blocks.hpp"
#include "sgn/numkit.hpp"
#include "sgn/rff.hpp"

namespace sgn {

inline constexpr double kLayerNormEps = 1e-5;
inline constexpr double kFixedGateValue = 0.1;

// How the spectral branch Psi enters the activation T(u).
enum class SpectralBranch {
  Gated,         // phi(u) + G(u) * Psi(u)
  Ungated,       // phi(u) + Psi(u)
  FixedGate,     // phi(u) + 0.1 Psi(u)
  PureSpectral,  // G(u) * Psi(u), no base branch
};

struct SgnParams {
  DenseMatrix w1;  // d_ff x d_in
  Vec b1;          // d_ff
  RffParams rff;   // wr: d_ff x m, br: m
  DenseMatrix ar;  // 2m x d_ff
  Vec wg;          // d_ff
  Vec bg;          // d_ff
  Vec ln_gamma;    // d_ff
  Vec ln_beta;     // d_ff
  DenseMatrix w2;  // d_out x d_ff
  Vec b2;          // d_out
  Activation activation = Activation::Gelu;
  SpectralBranch branch = SpectralBranch::Gated;

  std::size_t d_in() const noexcept { return w1.cols(); }
  std::size_t d_ff() const noexcept { return w1.rows(); }
  std::size_t d_out() const noexcept { return w2.rows(); }
  std::size_t budget() const noexcept { return rff.budget(); }
};

struct SgnGrads {
  DenseMatrix w1;
  Vec b1;
  DenseMatrix wr;
  Vec br;
  DenseMatrix ar;
  Vec wg;
  Vec bg;
  Vec ln_gamma;
  Vec ln_beta;
  DenseMatrix w2;
  Vec b2;
  Vec x;  // gradient with respect to the block input (not a parameter block)
};

struct LayerNormStats {
  double mean = 0.0;
  double inv_std = 0.0;
  Vec normalized;  // (u - mean) * inv_std
  Vec output;      // gamma * normalized + beta
};

struct SgnCache {
  Vec x;
  Vec u;
  LayerNormStats ln;
  Vec gate;      // G(u)
  Vec theta;     // W_r^T u + b_r
  Vec features;  // gamma(u)
  Vec psi;       // gamma(u) A_r
  Vec dphi;      // phi'(u), zero without the base branch
  Vec t;         // T(u)
};

struct SgnForward {
  Vec y;
  SgnCache cache;
};

struct JacobianTerms {
  DenseMatrix base;        // diag(phi'(u))
  DenseMatrix injection;   // diag(G(u)) J_Psi(u)
  DenseMatrix modulation;  // diag(Psi(u)) J_G(u)
};

// Per-token LayerNorm over the channels of u. A constant u normalizes to zero,
// so the output is beta.
LayerNormStats layer_norm(std::span<const double> u, std::span<const double> gamma,
                          std::span<const double> beta);

// G(u) = sigmoid(w_g * LN(u) + b_g), channel-wise.
Vec gate(std::span<const double> u, const SgnParams& p);
Vec spectral_projection(std::span<const double> u, const SgnParams& p);
Vec sgn_activation(std::span<const double> u, const SgnParams& p);

SgnForward sgn_forward(std::span<const double> x, const SgnParams& p);
SgnGrads sgn_backward(std::span<const double> upstream, const SgnCache& cache,
                      const SgnParams& p);
// Adds the gradients into acc instead of returning fresh ones; acc.x is overwritten.
void sgn_backward_accumulate(std::span<const double> upstream, const SgnCache& cache,
                             const SgnParams& p, SgnGrads& acc);

// The three product-rule terms of dT/du; their sum is the full Jacobian.
JacobianTerms sgn_jacobian_terms(std::span<const double> u, const SgnParams& p);

struct InitConfig {
  double eps = 1e-2;
  double sigma = 1.64;
  double gate_bias = -4.0;
  std::uint64_t seed = 0;
  Activation activation = Activation::Gelu;
  bool operator==(const InitConfig&) const = default;
};

// Base weights N(0, 1/fan_in), zero biases; A_r ~ N(0, eps^2); W_r ~ N(0, sigma^2/d_ff);
// b_r ~ U[0, 2 pi); w_g = 0; b_g = gate_bias; LayerNorm affine is the identity.
SgnParams homotopy_init(std::size_t d_in, std::size_t d_ff, std::size_t m, std::size_t d_out,
                        const InitConfig& cfg, Rng& rng);
inline SgnParams homotopy_init(std::size_t d_model, std::size_t d_ff, std::size_t m,
                               const InitConfig& cfg, Rng& rng) {
  return homotopy_init(d_model, d_ff, m, d_model, cfg, rng);
}

std::vector<ParamBlock> param_blocks(SgnParams& p);
std::vector<ParamBlock> param_blocks(SgnGrads& g);
SgnGrads zero_grads(const SgnParams& p);

// Opens the gate (w_g = 0, b_g = gate_bias) and routes the feature sum
//   sum_j alpha_j cos(w_j . u + b_j) + beta_j sin(w_j . u + b_j), scaled by sqrt(2/m),
// into channel `channel` only. alpha and beta have m entries; every other A_r
// column is zeroed. Output channel k then equals phi(u_k) + sigmoid(gate_bias)
// times that sum.
SgnParams embed_spectral_sum(SgnParams p, std::size_t channel, std::span<const double> alpha,
                             std::span<const double> beta, double gate_bias = 12.0);

// ---------------------------------------------------------------------------
// Plain two-layer block y = W2 phi(W1 x + b1) + b2.

struct MlpParams {
  DenseMatrix w1;
  Vec b1;
  DenseMatrix w2;
  Vec b2;
  Activation activation = Activation::Gelu;

  std::size_t d_in() const noexcept { return w1.cols(); }
  std::size_t d_ff() const noexcept { return w1.rows(); }
  std::size_t d_out() const noexcept { return w2.rows(); }
};

struct MlpGrads {
  DenseMatrix w1;
  Vec b1;
  DenseMatrix w2;
  Vec b2;
  Vec x;
};

struct MlpCache {
  Vec x;
  Vec u;
  Vec h;
  Vec dphi;  // phi'(u)
};

struct MlpForward {
  Vec y;
  MlpCache cache;
};

MlpParams mlp_init(std::size_t d_in, std::size_t d_ff, std::size_t d_out, Activation act,
                   Rng& rng);
MlpForward mlp_forward(std::span<const double> x, const MlpParams& p);
MlpGrads mlp_backward(std::span<const double> upstream, const MlpCache& cache,
                      const MlpParams& p);
void mlp_backward_accumulate(std::span<const double> upstream, const MlpCache& cache,
                             const MlpParams& p, MlpGrads& acc);

// The base pathway (W1, b1, W2, b2, phi) of an SGN block as a standalone MLP.
MlpParams base_mlp(const SgnParams& p);

std::vector<ParamBlock> param_blocks(MlpParams& p);
std::vector<ParamBlock> param_blocks(MlpGrads& g);
MlpGrads zero_grads(const MlpParams& p);

}  // namespace sgn
