#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace sgn {

using Vec = std::vector<double>;

// Row-major dense matrix of doubles. The only numeric container in the library;
// vectors are plain std::vector<double>.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::string shape_string() const;
  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vec data_;
};

// SplitMix64: a Weyl-sequence counter passed through a fixed 64-bit finalizer.
// The stream depends only on the seed, so results are identical everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() noexcept;
  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  // Box-Muller, one draw per call (the partner sample is discarded).
  double gaussian(double mu, double sigma) noexcept;

  std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
// y = m * x
Vec matvec(const DenseMatrix& m, std::span<const double> x);
// y = m^T * x
Vec matvec_transposed(const DenseMatrix& m, std::span<const double> x);

double erf(double x);
// Imaginary error function -i erf(ix). Supported for |x| <= 8.
double erfi(double x);
double bessel_j0(double x);
double normal_cdf(double x);
double normal_pdf(double x);

// One-sided DFT magnitudes |X_k|, k = 0..n/2, with X_k = (1/n) sum_t x_t e^{-2 pi i k t / n}.
// Parseval under this normalization: sum x_t^2 = n * sum_{k=0}^{n-1} |X_k|^2.
Vec dft_magnitudes(std::span<const double> samples);

// Composite Simpson rule with n (even) subintervals. Error O((hi-lo)^5 / n^4) for smooth f.
double integrate(const std::function<double(double)>& f, double lo, double hi, std::size_t n);

using LossFn = std::function<double(std::span<const double>)>;

// Central differences (L(p + h e_i) - L(p - h e_i)) / 2h per coordinate.
Vec finite_diff_grad(const LossFn& loss, std::span<const double> params, double h);

}  // namespace sgn
