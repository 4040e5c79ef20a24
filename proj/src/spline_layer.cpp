#include "sgn/spline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sgn/activations.hpp"
#include "sgn/errors.hpp"

namespace sgn {
namespace {

constexpr double kDomainLo = -1.0;
constexpr double kDomainHi = 1.0;

double clamp_to_domain(double t) {
  // The last interval is half-open, so pull the right end just inside it.
  return std::clamp(t, kDomainLo, std::nextafter(kDomainHi, kDomainLo));
}

// Order-0 through order-k values; returns the order-k row.
Vec cox_de_boor(double t, std::span<const double> knots, std::size_t order) {
  const std::size_t n0 = knots.size() - 1;
  Vec b(n0, 0.0);
  for (std::size_t i = 0; i < n0; ++i) b[i] = (t >= knots[i] && t < knots[i + 1]) ? 1.0 : 0.0;
  for (std::size_t k = 1; k <= order; ++k) {
    const std::size_t n = n0 - k;
    for (std::size_t i = 0; i < n; ++i) {
      const double left = (t - knots[i]) / (knots[i + k] - knots[i]);
      const double right = (knots[i + k + 1] - t) / (knots[i + k + 1] - knots[i + 1]);
      b[i] = left * b[i] + right * b[i + 1];
    }
    b.resize(n);
  }
  return b;
}

}  // namespace

Vec uniform_knots(std::size_t grid_size, std::size_t order) {
  if (grid_size == 0) throw ParameterError("uniform_knots: grid size must be positive");
  const double h = (kDomainHi - kDomainLo) / static_cast<double>(grid_size);
  Vec knots(grid_size + 2 * order + 1);
  for (std::size_t i = 0; i < knots.size(); ++i) {
    knots[i] = kDomainLo + (static_cast<double>(i) - static_cast<double>(order)) * h;
  }
  return knots;
}

Vec bspline_basis(double t, std::span<const double> knots, std::size_t order) {
  return cox_de_boor(clamp_to_domain(t), knots, order);
}

Vec bspline_basis_derivative(double t, std::span<const double> knots, std::size_t order) {
  const std::size_t count = knots.size() - 1 - order;
  Vec d(count, 0.0);
  if (order == 0) return d;
  const Vec lower = cox_de_boor(clamp_to_domain(t), knots, order - 1);
  const double k = static_cast<double>(order);
  for (std::size_t i = 0; i < count; ++i) {
    d[i] = k * (lower[i] / (knots[i + order] - knots[i]) -
                lower[i + 1] / (knots[i + order + 1] - knots[i + 1]));
  }
  return d;
}

SplineLayerParams spline_layer_init(std::size_t d_in, std::size_t d_out, std::size_t grid_size,
                                    std::size_t order, Rng& rng) {
  if (d_in == 0 || d_out == 0) throw ParameterError("spline_layer_init: empty layer");
  SplineLayerParams p;
  p.grid_size = grid_size;
  p.order = order;
  p.knots = uniform_knots(grid_size, order);
  p.coeffs = DenseMatrix(d_in * d_out, grid_size + order);
  for (double& c : p.coeffs.values()) c = rng.gaussian(0.0, 0.1);
  p.base_w = DenseMatrix(d_out, d_in);
  for (double& w : p.base_w.values()) w = rng.gaussian(0.0, 1.0 / std::sqrt(double(d_in)));
  p.spline_scale = DenseMatrix(d_out, d_in, 1.0);
  p.shift = DenseMatrix(d_out, d_in, 0.0);
  p.bias.assign(d_out, 0.0);
  return p;
}

Vec spline_layer_forward(std::span<const double> x, const SplineLayerParams& p,
                         SplineCache* cache) {
  if (x.size() != p.d_in()) {
    throw ShapeError("spline_layer_forward: expected input length " + std::to_string(p.d_in()) +
                     ", got " + std::to_string(x.size()));
  }
  const std::size_t nb = p.basis_count();
  DenseMatrix basis(p.d_in(), nb);
  Vec base(p.d_in());
  for (std::size_t j = 0; j < p.d_in(); ++j) {
    const Vec b = bspline_basis(x[j], p.knots, p.order);
    std::copy(b.begin(), b.end(), basis.row(j).begin());
    base[j] = silu(x[j]);
  }
  Vec y(p.bias);
  for (std::size_t i = 0; i < p.d_out(); ++i) {
    for (std::size_t j = 0; j < p.d_in(); ++j) {
      const auto c = p.coeffs.row(i * p.d_in() + j);
      const auto b = basis.row(j);
      double spline = 0.0;
      for (std::size_t q = 0; q < nb; ++q) spline += c[q] * b[q];
      y[i] += p.base_w(i, j) * base[j] + p.spline_scale(i, j) * spline + p.shift(i, j);
    }
  }
  if (cache) {
    cache->x.assign(x.begin(), x.end());
    cache->basis_deriv = DenseMatrix(p.d_in(), nb);
    for (std::size_t j = 0; j < p.d_in(); ++j) {
      if (x[j] < kDomainLo || x[j] >= kDomainHi) continue;
      const Vec d = bspline_basis_derivative(x[j], p.knots, p.order);
      std::copy(d.begin(), d.end(), cache->basis_deriv.row(j).begin());
    }
    cache->basis = std::move(basis);
  }
  return y;
}

SplineLayerGrads zero_grads(const SplineLayerParams& p) {
  SplineLayerGrads g;
  g.coeffs = DenseMatrix(p.coeffs.rows(), p.coeffs.cols());
  g.base_w = DenseMatrix(p.d_out(), p.d_in());
  g.spline_scale = DenseMatrix(p.d_out(), p.d_in());
  g.shift = DenseMatrix(p.d_out(), p.d_in());
  g.bias.assign(p.d_out(), 0.0);
  g.x.assign(p.d_in(), 0.0);
  return g;
}

SplineLayerGrads spline_layer_backward(std::span<const double> upstream, const SplineCache& c,
                                       const SplineLayerParams& p) {
  if (upstream.size() != p.d_out() || c.x.size() != p.d_in()) {
    throw ShapeError("spline_layer_backward: upstream/cache do not match parameters");
  }
  const std::size_t nb = p.basis_count();
  SplineLayerGrads g = zero_grads(p);
  for (std::size_t i = 0; i < p.d_out(); ++i) {
    const double gy = upstream[i];
    g.bias[i] = gy;
    for (std::size_t j = 0; j < p.d_in(); ++j) {
      const auto coef = p.coeffs.row(i * p.d_in() + j);
      auto gcoef = g.coeffs.row(i * p.d_in() + j);
      const auto b = c.basis.row(j);
      const auto db = c.basis_deriv.row(j);
      double spline = 0.0;
      double dspline = 0.0;
      for (std::size_t q = 0; q < nb; ++q) {
        spline += coef[q] * b[q];
        dspline += coef[q] * db[q];
        gcoef[q] = gy * p.spline_scale(i, j) * b[q];
      }
      g.base_w(i, j) = gy * silu(c.x[j]);
      g.spline_scale(i, j) = gy * spline;
      g.shift(i, j) = gy;
      g.x[j] += gy * (p.base_w(i, j) * silu_prime(c.x[j]) + p.spline_scale(i, j) * dspline);
    }
  }
  return g;
}

std::vector<ParamBlock> param_blocks(SplineLayerParams& p) {
  return {{"coeffs", p.coeffs.values(), p.coeffs.rows(), p.coeffs.cols()},
          {"base_w", p.base_w.values(), p.base_w.rows(), p.base_w.cols()},
          {"spline_scale", p.spline_scale.values(), p.spline_scale.rows(), p.spline_scale.cols()},
          {"shift", p.shift.values(), p.shift.rows(), p.shift.cols()},
          {"bias", p.bias, p.bias.size(), 1}};
}

std::vector<ParamBlock> param_blocks(SplineLayerGrads& g) {
  return {{"coeffs", g.coeffs.values(), g.coeffs.rows(), g.coeffs.cols()},
          {"base_w", g.base_w.values(), g.base_w.rows(), g.base_w.cols()},
          {"spline_scale", g.spline_scale.values(), g.spline_scale.rows(), g.spline_scale.cols()},
          {"shift", g.shift.values(), g.shift.rows(), g.shift.cols()},
          {"bias", g.bias, g.bias.size(), 1}};
}

}  // namespace sgn
