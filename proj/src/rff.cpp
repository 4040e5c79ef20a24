#include "sgn/rff.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sgn/errors.hpp"

namespace sgn {

double RffParams::feature_scale() const {
  const double m = static_cast<double>(budget());
  return scale == RffScale::Layer ? std::sqrt(2.0 / m) : std::sqrt(1.0 / m);
}

RffParams rff_init(std::size_t d, std::size_t m, double sigma, Rng& rng, RffScale scale) {
  if (!(sigma > 0.0)) throw ParameterError("rff_init: sigma must be positive");
  if (d == 0 || m == 0) throw ParameterError("rff_init: d and m must be positive");
  RffParams p;
  p.scale = scale;
  p.wr = DenseMatrix(d, m);
  const double stddev = sigma / std::sqrt(static_cast<double>(d));
  for (double& w : p.wr.values()) w = rng.gaussian(0.0, stddev);
  p.br.resize(m);
  for (double& b : p.br) b = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return p;
}

RffParams kernel_rff_init(std::size_t d, std::size_t m, double length_scale, Rng& rng) {
  if (!(length_scale > 0.0)) throw ParameterError("kernel_rff_init: length scale must be positive");
  RffParams p;
  p.scale = RffScale::Kernel;
  p.wr = DenseMatrix(d, m);
  for (double& w : p.wr.values()) w = rng.gaussian(0.0, 1.0 / length_scale);
  p.br.assign(m, 0.0);
  return p;
}

Vec rff_phases(std::span<const double> u, const RffParams& p) {
  if (u.size() != p.dim()) {
    throw ShapeError("rff: input length " + std::to_string(u.size()) + " vs frequencies " +
                     p.wr.shape_string());
  }
  Vec theta = matvec_transposed(p.wr, u);
  if (p.scale == RffScale::Layer) {
    for (std::size_t j = 0; j < theta.size(); ++j) theta[j] += p.br[j];
  }
  return theta;
}

Vec rff_features(std::span<const double> u, const RffParams& p) {
  const Vec theta = rff_phases(u, p);
  const std::size_t m = theta.size();
  const double s = p.feature_scale();
  Vec z(2 * m);
  for (std::size_t j = 0; j < m; ++j) {
    z[j] = s * std::cos(theta[j]);
    z[m + j] = s * std::sin(theta[j]);
  }
  return z;
}

double kernel_estimate(std::span<const double> x, std::span<const double> y,
                       const RffParams& p) {
  if (p.scale != RffScale::Kernel) {
    throw ModeError("kernel_estimate: LayerScale features overestimate the kernel by 2x");
  }
  if (x.size() != y.size()) throw ShapeError("kernel_estimate: x and y differ in length");
  const Vec zx = rff_features(x, p);
  const Vec zy = rff_features(y, p);
  double acc = 0.0;
  for (std::size_t i = 0; i < zx.size(); ++i) acc += zx[i] * zy[i];
  return acc;
}

DenseMatrix rff_feature_jacobian(std::span<const double> u, const RffParams& p) {
  const Vec theta = rff_phases(u, p);
  const std::size_t m = theta.size();
  const std::size_t d = p.dim();
  const double s = p.feature_scale();
  DenseMatrix jac(2 * m, d);
  for (std::size_t j = 0; j < m; ++j) {
    const double ds_cos = -s * std::sin(theta[j]);
    const double ds_sin = s * std::cos(theta[j]);
    for (std::size_t i = 0; i < d; ++i) {
      jac(j, i) = ds_cos * p.wr(i, j);
      jac(m + j, i) = ds_sin * p.wr(i, j);
    }
  }
  return jac;
}

double gaussian_kernel(std::span<const double> x, std::span<const double> y,
                       double length_scale) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
  return std::exp(-d2 / (2.0 * length_scale * length_scale));
}

}  // namespace sgn
