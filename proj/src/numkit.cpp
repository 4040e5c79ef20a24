#include "sgn/numkit.hpp"

#include <cmath>
#include <numbers>

#include "sgn/errors.hpp"
#include "sgn/kernels.hpp"

namespace sgn {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("DenseMatrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

std::string DenseMatrix::shape_string() const {
  return "[" + std::to_string(rows_) + "x" + std::to_string(cols_) + "]";
}

std::uint64_t Rng::next_u64() noexcept {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::gaussian(double mu, double sigma) noexcept {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  return mu + sigma * r * std::cos(2.0 * std::numbers::pi * u2);
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  return kernels::matmul_parallel(a, b);
}

Vec matvec(const DenseMatrix& m, std::span<const double> x) {
  if (m.cols() != x.size()) {
    throw ShapeError("matvec: " + m.shape_string() + " x [" + std::to_string(x.size()) + "]");
  }
  Vec y(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) acc += r[j] * x[j];
    y[i] = acc;
  }
  return y;
}

Vec matvec_transposed(const DenseMatrix& m, std::span<const double> x) {
  if (m.rows() != x.size()) {
    throw ShapeError("matvec_transposed: " + m.shape_string() + "^T x [" +
                     std::to_string(x.size()) + "]");
  }
  Vec y(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    const double xi = x[i];
    for (std::size_t j = 0; j < r.size(); ++j) y[j] += r[j] * xi;
  }
  return y;
}

// libstdc++ erf is accurate to a few ulp, well inside the 1e-12 contract.
double erf(double x) { return std::erf(x); }

// Maclaurin series 2/sqrt(pi) * sum x^{2k+1} / (k! (2k+1)). All terms share the
// sign of x, so there is no cancellation and the relative error stays near
// machine precision over the whole supported range.
double erfi(double x) {
  if (!std::isfinite(x) || std::fabs(x) > 8.0) {
    throw RangeError("erfi: |x| must be <= 8, got " + std::to_string(x));
  }
  const double x2 = x * x;
  double power = x;  // x^{2k+1} / k!
  double sum = x;
  for (int k = 1; k < 400; ++k) {
    power *= x2 / k;
    const double term = power / (2 * k + 1);
    sum += term;
    if (std::fabs(term) <= 1e-17 * std::fabs(sum)) break;
  }
  return 2.0 / std::sqrt(std::numbers::pi) * sum;
}

// libstdc++ evaluates J0 by its power series for small arguments and a
// continued-fraction recurrence beyond; both are accurate to ~1e-15 for |x| <= 50.
// The absolute value makes J0(-x) == J0(x) bit for bit.
double bessel_j0(double x) { return std::cyl_bessel_j(0.0, std::fabs(x)); }

double normal_cdf(double x) { return 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

Vec dft_magnitudes(std::span<const double> samples) {
  return kernels::dft_magnitudes_parallel(samples);
}

double integrate(const std::function<double(double)>& f, double lo, double hi, std::size_t n) {
  if (n < 2 || n % 2 != 0) {
    throw ParameterError("integrate: n must be even and >= 2, got " + std::to_string(n));
  }
  if (!(lo < hi)) throw ParameterError("integrate: require lo < hi");
  const double h = (hi - lo) / static_cast<double>(n);
  double odd = 0.0;
  double even = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double v = f(lo + h * static_cast<double>(i));
    (i % 2 ? odd : even) += v;
  }
  const double total = (f(lo) + f(hi) + 4.0 * odd + 2.0 * even) * h / 3.0;
  if (!std::isfinite(total)) throw NumericError("integrate: non-finite result");
  return total;
}

Vec finite_diff_grad(const LossFn& loss, std::span<const double> params, double h) {
  if (!(h > 0.0)) throw ParameterError("finite_diff_grad: h must be positive");
  Vec p(params.begin(), params.end());
  Vec grad(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double saved = p[i];
    p[i] = saved + h;
    const double up = loss(p);
    p[i] = saved - h;
    const double down = loss(p);
    p[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericError("finite_diff_grad: non-finite loss probing coordinate " +
                         std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace sgn
