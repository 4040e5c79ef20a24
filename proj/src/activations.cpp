#include "sgn/activations.hpp"

#include <cmath>
#include <numbers>

#include "sgn/errors.hpp"
#include "sgn/numkit.hpp"

namespace sgn {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::Gelu: return "gelu";
    case Activation::Relu: return "relu";
    case Activation::Silu: return "silu";
    case Activation::Tanh: return "tanh";
  }
  return "unknown";
}

Activation parse_activation(std::string_view name) {
  if (name == "gelu") return Activation::Gelu;
  if (name == "relu") return Activation::Relu;
  if (name == "silu") return Activation::Silu;
  if (name == "tanh") return Activation::Tanh;
  throw ParameterError("unknown activation '" + std::string(name) + "'");
}

double gelu(double x) { return x * normal_cdf(x); }

double gelu_prime(double x) { return normal_cdf(x) + x * normal_pdf(x); }

double silu(double x) { return x / (1.0 + std::exp(-x)); }

double silu_prime(double x) {
  const double s = 1.0 / (1.0 + std::exp(-x));
  return s * (1.0 + x * (1.0 - s));
}

double activate(Activation a, double x) {
  switch (a) {
    case Activation::Gelu: return gelu(x);
    case Activation::Relu: return x > 0.0 ? x : 0.0;
    case Activation::Silu: return silu(x);
    case Activation::Tanh: return std::tanh(x);
  }
  return 0.0;
}

double activate_prime(Activation a, double x) {
  switch (a) {
    case Activation::Gelu: return gelu_prime(x);
    case Activation::Relu: return x > 0.0 ? 1.0 : 0.0;
    case Activation::Silu: return silu_prime(x);
    case Activation::Tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
  }
  return 0.0;
}

ActivationValue activate_with_prime(Activation a, double x) {
  if (a == Activation::Gelu) {
    const double cdf = normal_cdf(x);
    return {x * cdf, cdf + x * normal_pdf(x)};
  }
  return {activate(a, x), activate_prime(a, x)};
}

double gelu_spectrum(double omega) {
  if (!std::isfinite(omega) || std::fabs(omega) > 8.0) {
    throw RangeError("gelu_spectrum: |omega| must be <= 8");
  }
  const double damp = std::exp(-0.5 * omega * omega);
  // -w e^{-w^2/2} (1 + i erfi(w/sqrt2)) + (i/sqrt2) e^{-w^2}
  const double re = -omega * damp;
  const double im = -omega * damp * erfi(omega / std::numbers::sqrt2) +
                    std::exp(-omega * omega) / std::numbers::sqrt2;
  const double scale = std::numbers::pi / 2.0;  // |sqrt(pi/2)|^2
  return scale * (re * re + im * im);
}

AlphaDerivation derive_alpha_opt(std::size_t n, double range) {
  AlphaDerivation d;
  d.n = n;
  d.range = range;
  d.i1 = integrate(gelu_spectrum, -range, range, n);
  d.i2 = integrate([](double w) { const double s = gelu_spectrum(w); return s * s; },
                   -range, range, n);
  if (!(d.i2 > 0.0)) throw NumericError("derive_alpha_opt: non-positive second moment");
  d.alpha = std::sqrt(d.i1 / d.i2);
  return d;
}

}  // namespace sgn
