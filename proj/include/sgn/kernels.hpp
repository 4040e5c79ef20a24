#pragma once

// Data-parallel kernels. Every OpenMP kernel here has a serial twin with the
// same per-element accumulation order; the unit tests compare the two and the
// sgn_kernels_bench target times them.

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "sgn/numkit.hpp"

namespace sgn::kernels {

// Worker count: SGN_THREADS if set and positive, otherwise the OpenMP default.
int thread_count();

// Reductions split [0, n) into this many fixed chunks regardless of how many
// threads run them, and merge chunk partials left to right. Results are
// therefore bit-identical for any thread count.
inline constexpr std::size_t kReductionChunks = 64;

DenseMatrix matmul_serial(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_parallel(const DenseMatrix& a, const DenseMatrix& b);

Vec dft_magnitudes_serial(std::span<const double> samples);
Vec dft_magnitudes_parallel(std::span<const double> samples);

// Sums body(partial, i) over i in [0, n) in strict index order.
template <class Partial, class Init, class Body, class Merge>
Partial reduce_serial(std::size_t n, Init init, Body body, Merge /*merge*/) {
  Partial acc = init();
  for (std::size_t i = 0; i < n; ++i) body(acc, i);
  return acc;
}

template <class Partial, class Init, class Body, class Merge>
Partial reduce_parallel(std::size_t n, Init init, Body body, Merge merge) {
  const std::size_t chunks = std::max<std::size_t>(1, std::min(n, kReductionChunks));
  std::vector<Partial> partials;
  partials.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) partials.push_back(init());
  const long long nchunks = static_cast<long long>(chunks);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long long c = 0; c < nchunks; ++c) {
    const std::size_t lo = n * static_cast<std::size_t>(c) / chunks;
    const std::size_t hi = n * static_cast<std::size_t>(c + 1) / chunks;
    for (std::size_t i = lo; i < hi; ++i) body(partials[c], i);
  }
  for (std::size_t c = 1; c < chunks; ++c) merge(partials[0], partials[c]);
  return std::move(partials[0]);
}

// Independent per-index work with no reduction.
template <class Body>
void for_each_parallel(std::size_t n, Body body) {
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long long i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
}

}  // namespace sgn::kernels
