#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sgn/blocks.hpp"
#include "sgn/numkit.hpp"

namespace sgn {

// KAN-style layer. Edge (i <- j) computes
//   base_w(i,j) silu(x_j) + spline_scale(i,j) sum_c coeffs(i*d_in + j, c) B_c(x_j) + shift(i,j)
// with G + K order-K B-splines on a uniform grid of G intervals over [-1, 1].
// Output i is bias_i plus the sum over its incoming edges. The spline term sees
// x_j clamped to [-1, 1]; the silu term sees the raw input.
struct SplineLayerParams {
  std::size_t grid_size = 5;  // G
  std::size_t order = 3;      // K
  Vec knots;                  // G + 2K + 1 knots, extended K intervals past each end
  DenseMatrix coeffs;         // (d_out * d_in) x (G + K)
  DenseMatrix base_w;         // d_out x d_in
  DenseMatrix spline_scale;   // d_out x d_in
  DenseMatrix shift;          // d_out x d_in
  Vec bias;                   // d_out

  std::size_t d_in() const noexcept { return base_w.cols(); }
  std::size_t d_out() const noexcept { return base_w.rows(); }
  std::size_t basis_count() const noexcept { return grid_size + order; }
};

struct SplineLayerGrads {
  DenseMatrix coeffs;
  DenseMatrix base_w;
  DenseMatrix spline_scale;
  DenseMatrix shift;
  Vec bias;
  Vec x;
};

struct SplineCache {
  Vec x;
  DenseMatrix basis;        // d_in x (G + K), evaluated at clamped inputs
  DenseMatrix basis_deriv;  // d/dx of basis, zero where the input was clamped
};

Vec uniform_knots(std::size_t grid_size, std::size_t order);

// All G + K order-K B-spline values at t (Cox-de Boor). t is clamped into [-1, 1).
Vec bspline_basis(double t, std::span<const double> knots, std::size_t order);
Vec bspline_basis_derivative(double t, std::span<const double> knots, std::size_t order);

SplineLayerParams spline_layer_init(std::size_t d_in, std::size_t d_out, std::size_t grid_size,
                                    std::size_t order, Rng& rng);

Vec spline_layer_forward(std::span<const double> x, const SplineLayerParams& p,
                         SplineCache* cache = nullptr);
SplineLayerGrads spline_layer_backward(std::span<const double> upstream, const SplineCache& cache,
                                       const SplineLayerParams& p);

std::vector<ParamBlock> param_blocks(SplineLayerParams& p);
std::vector<ParamBlock> param_blocks(SplineLayerGrads& g);
SplineLayerGrads zero_grads(const SplineLayerParams& p);

}  // namespace sgn
