#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace sgn {

enum class Activation { Gelu, Relu, Silu, Tanh };

std::string_view to_string(Activation a);
// Accepts "gelu", "relu", "silu", "tanh"; throws ParameterError otherwise.
Activation parse_activation(std::string_view name);

double activate(Activation a, double x);
double activate_prime(Activation a, double x);

struct ActivationValue {
  double value;
  double prime;
};
// Both at once; value is bit-identical to activate(), prime to activate_prime().
ActivationValue activate_with_prime(Activation a, double x);

// Exact GELU x * Phi(x) with Phi from erf (not the tanh approximation).
double gelu(double x);
double gelu_prime(double x);
double silu(double x);
double silu_prime(double x);

// |F{GELU}(w)|^2 with
//   F{GELU}(w) = sqrt(pi/2) [ -w e^{-w^2/2} (1 + erf(i w / sqrt2)) + (i / sqrt2) e^{-w^2} ]
// and erf(i z) = i erfi(z). Defined for |w| <= 8.
double gelu_spectrum(double omega);

struct AlphaDerivation {
  double i1 = 0.0;  // integral of S
  double i2 = 0.0;  // integral of S^2
  double alpha = 0.0;
  std::size_t n = 0;
  double range = 0.0;  // integrals run over [-range, range]
};

// alpha = sqrt(I1 / I2), both integrals by composite Simpson.
AlphaDerivation derive_alpha_opt(std::size_t n = 4096, double range = 8.0);

}  // namespace sgn
