#pragma once

#include <cstddef>
#include <span>

#include "sgn/numkit.hpp"

namespace sgn {

// LayerScale: sqrt(2/m) on both the cos and sin blocks, with phases; used inside
// the SGN layer. KernelScale: sqrt(1/m), phase-free cos/sin pairs, so that
// z(x)^T z(y) = (1/m) sum_j cos(w_j^T (x - y)) is an unbiased kernel estimate.
enum class RffScale { Layer, Kernel };

struct RffParams {
  DenseMatrix wr;  // d x m, frequency w_j is column j
  Vec br;          // m phases
  RffScale scale = RffScale::Layer;

  std::size_t dim() const noexcept { return wr.rows(); }
  std::size_t budget() const noexcept { return wr.cols(); }
  double feature_scale() const;
};

// Wr ~ N(0, sigma^2 / d) entrywise, br ~ U[0, 2 pi).
RffParams rff_init(std::size_t d, std::size_t m, double sigma, Rng& rng,
                   RffScale scale = RffScale::Layer);

// Frequencies ~ N(0, length_scale^-2 I) in KernelScale mode, so the features
// estimate exp(-|x - y|^2 / (2 length_scale^2)).
RffParams kernel_rff_init(std::size_t d, std::size_t m, double length_scale, Rng& rng);

// Pre-activations W_r^T u (+ b_r in LayerScale), length m.
Vec rff_phases(std::span<const double> u, const RffParams& p);

// [s cos(theta) ; s sin(theta)], length 2m.
Vec rff_features(std::span<const double> u, const RffParams& p);

// z(x)^T z(y). KernelScale only.
double kernel_estimate(std::span<const double> x, std::span<const double> y,
                       const RffParams& p);

// d rff_features / d u, shape 2m x d.
DenseMatrix rff_feature_jacobian(std::span<const double> u, const RffParams& p);

double gaussian_kernel(std::span<const double> x, std::span<const double> y,
                       double length_scale);

}  // namespace sgn
