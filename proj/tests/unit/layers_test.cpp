#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sgn/errors.hpp"
#include "sgn/layers.hpp"
#include "sgn/training.hpp"

using namespace sgn;

namespace {

// Scalar-by-scalar evaluation of one block, written without the library's
// vector helpers.
std::vector<double> naive_block(const std::vector<double>& x, const SgnParams& p) {
  const std::size_t d_in = p.w1.cols(), d_ff = p.w1.rows(), m = p.rff.wr.cols();
  const std::size_t d_out = p.w2.rows();
  std::vector<double> u(d_ff);
  for (std::size_t i = 0; i < d_ff; ++i) {
    double s = p.b1[i];
    for (std::size_t j = 0; j < d_in; ++j) s += p.w1(i, j) * x[j];
    u[i] = s;
  }
  double mean = 0.0;
  for (double v : u) mean += v;
  mean /= d_ff;
  double var = 0.0;
  for (double v : u) var += (v - mean) * (v - mean);
  var /= d_ff;
  std::vector<double> t(d_ff);
  const double scale = std::sqrt(2.0 / m);
  for (std::size_t k = 0; k < d_ff; ++k) {
    const double ln = p.ln_gamma[k] * (u[k] - mean) / std::sqrt(var + 1e-5) + p.ln_beta[k];
    double g = 1.0 / (1.0 + std::exp(-(p.wg[k] * ln + p.bg[k])));
    if (p.branch == SpectralBranch::Ungated) g = 1.0;
    if (p.branch == SpectralBranch::FixedGate) g = 0.1;
    double psi = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      double theta = p.rff.br[j];
      for (std::size_t i = 0; i < d_ff; ++i) theta += p.rff.wr(i, j) * u[i];
      psi += scale * std::cos(theta) * p.ar(j, k) + scale * std::sin(theta) * p.ar(m + j, k);
    }
    const double base = p.branch == SpectralBranch::PureSpectral ? 0.0 : oracle::gelu(u[k]);
    t[k] = base + g * psi;
  }
  std::vector<double> y(d_out);
  for (std::size_t o = 0; o < d_out; ++o) {
    double s = p.b2[o];
    for (std::size_t k = 0; k < d_ff; ++k) s += p.w2(o, k) * t[k];
    y[o] = s;
  }
  return y;
}

SgnParams busy_params(std::size_t d_model, std::size_t d_ff, std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  InitConfig init;
  init.eps = 1.0;
  init.gate_bias = 0.0;
  SgnParams p = homotopy_init(d_model, d_ff, m, init, rng);
  for (double& v : p.wg) v = rng.gaussian(0, 1);
  for (double& v : p.bg) v = rng.gaussian(0, 1);
  for (double& v : p.ln_gamma) v = 1.0 + 0.3 * rng.gaussian(0, 1);
  for (double& v : p.ln_beta) v = 0.3 * rng.gaussian(0, 1);
  for (double& v : p.b1) v = 0.3 * rng.gaussian(0, 1);
  for (double& v : p.b2) v = 0.3 * rng.gaussian(0, 1);
  return p;
}

DenseMatrix gaussian(std::size_t r, std::size_t c, Rng& rng) {
  DenseMatrix m(r, c);
  for (double& v : m.values()) v = rng.gaussian(0, 1);
  return m;
}

const SpectralBranch kBranches[] = {SpectralBranch::Gated, SpectralBranch::Ungated,
                                    SpectralBranch::FixedGate, SpectralBranch::PureSpectral};

}  // namespace

TEST(Gate, OpenAtZeroBias) {
  Rng rng(1);
  InitConfig init;
  init.gate_bias = 0.0;
  const SgnParams p = homotopy_init(2, 5, 2, init, rng);
  for (double g : gate(Vec{0.3, -1, 2, 0.1, 4}, p)) EXPECT_EQ(g, 0.5);
}

TEST(Gate, HandEvaluatedLayerNorm) {
  Rng rng(1);
  SgnParams p = homotopy_init(2, 2, 1, InitConfig{}, rng);
  p.wg = {1.0, 1.0};
  p.bg = {0.0, 0.0};
  const Vec g = gate(Vec{1.0, -1.0}, p);
  EXPECT_NEAR(g[0], 0.7311, 1e-3);
  EXPECT_NEAR(g[1], 0.2689, 1e-3);
}

TEST(Gate, ClosedWithVeryNegativeBias) {
  Rng rng(2);
  InitConfig init;
  init.gate_bias = -10.0;
  SgnParams p = homotopy_init(3, 4, 2, init, rng);
  for (double& v : p.wg) v = 0.5;
  for (double g : gate(Vec{1, -2, 0.5, 3}, p)) EXPECT_LT(g, 5e-4);
}

TEST(LayerNorm, ConstantInputGivesBeta) {
  const auto s = layer_norm(Vec{2, 2, 2}, Vec{1, 1, 1}, Vec{0.1, 0.2, 0.3});
  EXPECT_EQ(s.output, (Vec{0.1, 0.2, 0.3}));
}

TEST(SgnActivation, ZeroSpectralIsBaseExactly) {
  Rng rng(3);
  InitConfig init;
  init.eps = 0.0;
  const SgnParams p = homotopy_init(3, 6, 3, init, rng);
  const Vec u{0.1, -2, 3, 0.5, -0.7, 1.2};
  const Vec t = sgn_activation(u, p);
  for (std::size_t k = 0; k < u.size(); ++k) EXPECT_EQ(t[k], gelu(u[k]));
}

TEST(SgnActivation, ClosedGateIsNearBase) {
  Rng rng(4);
  InitConfig init;
  init.eps = 1.0;
  init.gate_bias = -20.0;
  const SgnParams p = homotopy_init(3, 6, 3, init, rng);
  const Vec u{0.1, -2, 3, 0.5, -0.7, 1.2};
  const Vec t = sgn_activation(u, p);
  for (std::size_t k = 0; k < u.size(); ++k) EXPECT_NEAR(t[k], gelu(u[k]), 1e-8);
}

TEST(SgnForward, MatchesNaiveEvaluation) {
  Rng rng(5);
  for (auto branch : kBranches) {
    SgnParams p = busy_params(2, 3, 2, 11);
    p.branch = branch;
    const Vec x{0.7, -1.3};
    const Vec y = sgn_forward(x, p).y;
    const auto want = naive_block(x, p);
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y[i], want[i], 1e-12);
  }
}

TEST(SgnForward, RectangularBlock) {
  Rng rng(6);
  const SgnParams p = homotopy_init(3, 5, 2, 1, InitConfig{}, rng);
  EXPECT_EQ(p.d_out(), 1u);
  const Vec x{0.1, 0.2, 0.3};
  EXPECT_NEAR(sgn_forward(x, p).y[0], naive_block(x, p)[0], 1e-12);
  EXPECT_THROW(sgn_forward(Vec{1.0}, p), ShapeError);
}

TEST(Homotopy, InitLayout) {
  Rng rng(7);
  InitConfig init;
  init.gate_bias = -4.0;
  const SgnParams p = homotopy_init(4, 6, 3, init, rng);
  for (double v : p.wg) EXPECT_EQ(v, 0.0);
  for (double v : p.bg) EXPECT_EQ(v, -4.0);
  for (double v : p.ln_gamma) EXPECT_EQ(v, 1.0);
  for (double v : p.ln_beta) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(p.ar.rows(), 6u);
  EXPECT_EQ(p.ar.cols(), 6u);
  InitConfig bad;
  bad.sigma = 0.0;
  EXPECT_THROW(homotopy_init(2, 2, 1, bad, rng), ParameterError);
}

TEST(Homotopy, ZeroEpsMatchesMlpBitForBit) {
  Rng rng(8);
  InitConfig init;
  init.eps = 0.0;
  const SgnParams p = homotopy_init(4, 6, 3, init, rng);
  const MlpParams base = base_mlp(p);
  for (int i = 0; i < 100; ++i) {
    const Vec x{rng.gaussian(0, 1), rng.gaussian(0, 1), rng.gaussian(0, 1), rng.gaussian(0, 1)};
    EXPECT_EQ(sgn_forward(x, p).y, mlp_forward(x, base).y);
  }
}

TEST(Homotopy, ZeroEpsBaseGradientsMatchMlp) {
  Rng rng(9);
  InitConfig init;
  init.eps = 0.0;
  const SgnParams p = homotopy_init(3, 5, 2, init, rng);
  const MlpParams base = base_mlp(p);
  const Vec x{0.4, -0.3, 1.1};
  const Vec up{0.5, -1.0, 0.25};
  const SgnForward fs = sgn_forward(x, p);
  const MlpForward fm = mlp_forward(x, base);
  const SgnGrads gs = sgn_backward(up, fs.cache, p);
  const MlpGrads gm = mlp_backward(up, fm.cache, base);
  for (std::size_t i = 0; i < gs.w1.size(); ++i) EXPECT_NEAR(gs.w1.values()[i], gm.w1.values()[i], 1e-12);
  for (std::size_t i = 0; i < gs.w2.size(); ++i) EXPECT_NEAR(gs.w2.values()[i], gm.w2.values()[i], 1e-12);
  for (std::size_t i = 0; i < gs.b1.size(); ++i) EXPECT_NEAR(gs.b1[i], gm.b1[i], 1e-12);
  for (std::size_t i = 0; i < gs.b2.size(); ++i) EXPECT_NEAR(gs.b2[i], gm.b2[i], 1e-12);
  for (std::size_t i = 0; i < gs.x.size(); ++i) EXPECT_NEAR(gs.x[i], gm.x[i], 1e-12);
}

TEST(Homotopy, DeviationLinearInEps) {
  SgnParams p = busy_params(3, 4, 2, 12);
  const DenseMatrix a = p.ar;
  const Vec u{0.3, -0.2, 1.5, 0.9};
  auto dev = [&](double e) {
    for (std::size_t i = 0; i < a.size(); ++i) p.ar.values()[i] = e * a.values()[i];
    const Vec t = sgn_activation(u, p);
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) s += (t[k] - gelu(u[k])) * (t[k] - gelu(u[k]));
    return std::sqrt(s);
  };
  EXPECT_NEAR(dev(0.02) / dev(0.01), 2.0, 1e-10);
}

TEST(SgnBackward, GradientCheckEveryBranch) {
  Rng rng(13);
  for (auto branch : kBranches) {
    SgnParams p = busy_params(3, 4, 2, 14);
    p.branch = branch;
    const auto r = gradient_check(p, gaussian(3, 3, rng), gaussian(3, 3, rng), 1e-5);
    EXPECT_TRUE(r.passed) << r.worst_block << " " << r.max_rel_error;
    EXPECT_LT(r.max_rel_error, 1e-5);
  }
}

TEST(MlpBackward, GradientCheck) {
  Rng rng(15);
  for (auto act : {Activation::Gelu, Activation::Tanh, Activation::Silu}) {
    const MlpParams p = mlp_init(3, 5, 2, act, rng);
    const auto r = gradient_check(p, gaussian(4, 3, rng), gaussian(4, 2, rng), 1e-6);
    EXPECT_TRUE(r.passed) << r.worst_block << " " << r.max_rel_error;
  }
}

TEST(GradientCheck, FlagsCorruptedArGradient) {
  Rng rng(16);
  const SgnParams p = busy_params(3, 4, 2, 17);
  GradientPair pair = sgn_gradient_pair(p, gaussian(2, 3, rng), gaussian(2, 3, rng));
  EXPECT_TRUE(compare_gradients(pair, 1e-5).passed);
  std::size_t ar = 0;
  while (pair.names[ar] != "Ar") ++ar;
  for (double& g : pair.analytic[ar]) g *= 1.01;
  const auto r = compare_gradients(pair, 1e-5);
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.worst_block, "Ar");
}

TEST(GradientCheck, FlagsSingleCoordinate) {
  Rng rng(18);
  const SgnParams p = busy_params(2, 3, 2, 19);
  const GradientPair clean = sgn_gradient_pair(p, gaussian(2, 2, rng), gaussian(2, 2, rng));
  for (std::size_t b = 0; b < clean.names.size(); ++b) {
    GradientPair pair = clean;
    std::size_t idx = 0;
    for (std::size_t i = 0; i < pair.analytic[b].size(); ++i)
      if (std::fabs(pair.analytic[b][i]) > std::fabs(pair.analytic[b][idx])) idx = i;
    if (std::fabs(pair.analytic[b][idx]) < 1e-6) continue;
    pair.analytic[b][idx] *= 1.01;
    EXPECT_FALSE(compare_gradients(pair, 1e-5).passed) << clean.names[b];
  }
}

TEST(SgnBackward, AccumulateSumsSamples) {
  const SgnParams p = busy_params(2, 3, 2, 20);
  const Vec x1{0.1, 0.2}, x2{-0.5, 0.9}, up{1.0, -0.5};
  const auto f1 = sgn_forward(x1, p), f2 = sgn_forward(x2, p);
  const SgnGrads g1 = sgn_backward(up, f1.cache, p), g2 = sgn_backward(up, f2.cache, p);
  SgnGrads acc = zero_grads(p);
  sgn_backward_accumulate(up, f1.cache, p, acc);
  sgn_backward_accumulate(up, f2.cache, p, acc);
  for (std::size_t i = 0; i < acc.ar.size(); ++i)
    EXPECT_NEAR(acc.ar.values()[i], g1.ar.values()[i] + g2.ar.values()[i], 1e-14);
  for (std::size_t i = 0; i < acc.wr.size(); ++i)
    EXPECT_NEAR(acc.wr.values()[i], g1.wr.values()[i] + g2.wr.values()[i], 1e-14);
  EXPECT_EQ(acc.x, g2.x);
}

TEST(Jacobian, TermsSumToFiniteDifference) {
  const SgnParams p = busy_params(2, 4, 3, 21);
  const Vec u{0.3, -1.0, 0.8, 0.1};
  const JacobianTerms j = sgn_jacobian_terms(u, p);
  const double h = 1e-6;
  for (std::size_t c = 0; c < u.size(); ++c) {
    Vec a = u, b = u;
    a[c] += h;
    b[c] -= h;
    const Vec ta = sgn_activation(a, p), tb = sgn_activation(b, p);
    for (std::size_t r = 0; r < u.size(); ++r) {
      const double total = j.base(r, c) + j.injection(r, c) + j.modulation(r, c);
      EXPECT_NEAR(total, (ta[r] - tb[r]) / (2 * h), 1e-7);
    }
  }
}

TEST(BasisContainment, ReproducesRequestedSum) {
  const SgnParams base = busy_params(2, 5, 3, 22);
  const Vec alpha{0.7, -1.2, 0.4}, beta{0.3, 0.9, -0.5};
  const std::size_t k = 2;
  const SgnParams p = embed_spectral_sum(base, k, alpha, beta);
  const Vec u{0.5, -0.4, 1.3, 0.2, -1.1};
  const Vec t = sgn_activation(u, p);
  double sum = 0.0;
  const double s = std::sqrt(2.0 / 3.0);
  for (std::size_t j = 0; j < 3; ++j) {
    double theta = p.rff.br[j];
    for (std::size_t i = 0; i < u.size(); ++i) theta += p.rff.wr(i, j) * u[i];
    sum += s * (alpha[j] * std::cos(theta) + beta[j] * std::sin(theta));
  }
  const double want = oracle::gelu(u[k]) + sum;
  EXPECT_LT(std::fabs(t[k] - want) / std::fabs(want), 1e-4);
  for (std::size_t c = 0; c < u.size(); ++c) {
    if (c != k) {
      EXPECT_EQ(t[c], gelu(u[c]));
    }
  }
  EXPECT_THROW(embed_spectral_sum(base, 5, alpha, beta), RangeError);
  EXPECT_THROW(embed_spectral_sum(base, 0, Vec{1.0}, beta), ShapeError);
}

TEST(ParamBlocks, NamesAndShapes) {
  SgnParams p = busy_params(3, 4, 2, 23);
  const auto blocks = param_blocks(p);
  ASSERT_EQ(blocks.size(), 11u);
  EXPECT_EQ(blocks[0].name, "W1");
  EXPECT_EQ(blocks[4].name, "Ar");
  EXPECT_EQ(blocks[4].rows, 4u);
  EXPECT_EQ(blocks[4].cols, 4u);
  SgnGrads g = zero_grads(p);
  const auto gb = param_blocks(g);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    EXPECT_EQ(blocks[i].name, gb[i].name);
    EXPECT_EQ(blocks[i].values.size(), gb[i].values.size());
  }
}
