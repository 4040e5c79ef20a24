#include "sgn/kernels.hpp"

#include <omp.h>

#include <cmath>
#include <cstdlib>
#include <numbers>

#include "sgn/errors.hpp"

namespace sgn::kernels {

int thread_count() {
  if (const char* env = std::getenv("SGN_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return omp_get_max_threads();
}

namespace {

void check_conformable(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + a.shape_string() + " x " + b.shape_string() +
                     " (inner dimensions differ)");
  }
}

// i-k-j order: each output element accumulates over k in increasing order.
void matmul_row(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out, std::size_t i) {
  auto out_row = out.row(i);
  for (std::size_t k = 0; k < a.cols(); ++k) {
    const double aik = a(i, k);
    const auto b_row = b.row(k);
    for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
  }
}

double dft_bin(std::span<const double> x, std::size_t k) {
  const std::size_t n = x.size();
  double re = 0.0;
  double im = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    // Reduce k*t mod n first so the angle stays small and exact bins stay exact.
    const double angle = 2.0 * std::numbers::pi * static_cast<double>((k * t) % n) /
                         static_cast<double>(n);
    re += x[t] * std::cos(angle);
    im -= x[t] * std::sin(angle);
  }
  return std::hypot(re, im) / static_cast<double>(n);
}

void check_dft_input(std::span<const double> x) {
  if (x.size() < 2) throw ShapeError("dft_magnitudes: need at least 2 samples");
}

}  // namespace

DenseMatrix matmul_serial(const DenseMatrix& a, const DenseMatrix& b) {
  check_conformable(a, b);
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) matmul_row(a, b, out, i);
  return out;
}

DenseMatrix matmul_parallel(const DenseMatrix& a, const DenseMatrix& b) {
  check_conformable(a, b);
  DenseMatrix out(a.rows(), b.cols());
  for_each_parallel(a.rows(), [&](std::size_t i) { matmul_row(a, b, out, i); });
  return out;
}

Vec dft_magnitudes_serial(std::span<const double> samples) {
  check_dft_input(samples);
  Vec out(samples.size() / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = dft_bin(samples, k);
  return out;
}

Vec dft_magnitudes_parallel(std::span<const double> samples) {
  check_dft_input(samples);
  Vec out(samples.size() / 2 + 1);
  for_each_parallel(out.size(), [&](std::size_t k) { out[k] = dft_bin(samples, k); });
  return out;
}

}  // namespace sgn::kernels
