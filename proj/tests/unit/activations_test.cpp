#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "sgn/activations.hpp"
#include "sgn/errors.hpp"

using namespace sgn;

TEST(Gelu, MatchesErfDefinition) {
  // The series oracle is only trustworthy up to |x| ~ 4.
  for (double x = -4.0; x <= 4.0; x += 0.1) EXPECT_NEAR(gelu(x), oracle::gelu(x), 1e-13) << x;
  EXPECT_EQ(gelu(0.0), 0.0);
}

TEST(Gelu, PrimeMatchesFiniteDifference) {
  for (double x = -5.0; x <= 5.0; x += 0.25) {
    const double h = 1e-5;
    EXPECT_NEAR(gelu_prime(x), (gelu(x + h) - gelu(x - h)) / (2 * h), 1e-9) << x;
  }
  EXPECT_DOUBLE_EQ(gelu_prime(0.0), 0.5);
}

TEST(Activations, PrimesMatchFiniteDifference) {
  for (auto a : {Activation::Gelu, Activation::Silu, Activation::Tanh, Activation::Relu}) {
    for (double x : {-2.3, -0.7, 0.4, 1.9}) {
      const double h = 1e-6;
      EXPECT_NEAR(activate_prime(a, x), (activate(a, x + h) - activate(a, x - h)) / (2 * h), 1e-7);
    }
  }
}

TEST(Activations, WithPrimeIsBitIdentical) {
  for (auto a : {Activation::Gelu, Activation::Silu, Activation::Tanh, Activation::Relu}) {
    for (double x = -4.0; x <= 4.0; x += 0.37) {
      const auto v = activate_with_prime(a, x);
      EXPECT_EQ(v.value, activate(a, x));
      EXPECT_EQ(v.prime, activate_prime(a, x));
    }
  }
}

TEST(Activations, NamesRoundTrip) {
  for (auto a : {Activation::Gelu, Activation::Silu, Activation::Tanh, Activation::Relu}) {
    EXPECT_EQ(parse_activation(to_string(a)), a);
  }
  EXPECT_THROW(parse_activation("softplus"), ParameterError);
}

TEST(GeluSpectrum, FrozenValues) {
  EXPECT_NEAR(gelu_spectrum(0.0), 0.785398163397448, 1e-13);
  EXPECT_NEAR(gelu_spectrum(1.0), 0.73686826226389, 1e-12);
  EXPECT_NEAR(gelu_spectrum(8.0), 1.03311362699002, 1e-10);
}

TEST(GeluSpectrum, MatchesHandExpandedForm) {
  for (double w = -8.0; w <= 8.0; w += 0.5) {
    const double want = oracle::gelu_spectrum(w);
    EXPECT_NEAR(gelu_spectrum(w), want, 1e-9 * std::max(1.0, want)) << w;
  }
}

TEST(GeluSpectrum, EvenAndBounded) {
  for (double w = 0.0; w <= 8.0; w += 0.3) EXPECT_NEAR(gelu_spectrum(w), gelu_spectrum(-w), 1e-12);
  EXPECT_THROW(gelu_spectrum(8.5), RangeError);
}

TEST(DeriveAlpha, IntegralsMatchIndependentQuadrature) {
  const auto d = derive_alpha_opt(4096, 8.0);
  const double i1 = oracle::simpson([](double w) { return gelu_spectrum(w); }, -8.0, 8.0, 4096);
  const double i2 = oracle::simpson(
      [](double w) { return gelu_spectrum(w) * gelu_spectrum(w); }, -8.0, 8.0, 4096);
  EXPECT_NEAR(d.i1, i1, 1e-9 * i1);
  EXPECT_NEAR(d.i2, i2, 1e-9 * i2);
  EXPECT_DOUBLE_EQ(d.alpha, std::sqrt(d.i1 / d.i2));
  EXPECT_EQ(d.n, 4096u);
  EXPECT_EQ(d.range, 8.0);
}

TEST(DeriveAlpha, FrozenAndConverged) {
  const auto d = derive_alpha_opt();
  EXPECT_NEAR(d.i1, 18.2117248786560, 1e-9);
  EXPECT_NEAR(d.i2, 22.0855189631892, 1e-9);
  EXPECT_LT(std::fabs(derive_alpha_opt(8192).alpha - d.alpha), 1e-6);
}

TEST(DeriveAlpha, RejectsBadArguments) {
  EXPECT_THROW(derive_alpha_opt(101), ParameterError);
  EXPECT_THROW(derive_alpha_opt(100, 9.0), RangeError);
}
