#include <benchmark/benchmark.h>

#include <cmath>

#include "sgn/bench.hpp"
#include "sgn/kernels.hpp"

namespace {

sgn::DenseMatrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  sgn::Rng rng(seed);
  sgn::DenseMatrix m(r, c);
  for (double& v : m.values()) v = rng.gaussian(0.0, 1.0);
  return m;
}

void BM_MatmulSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, n, 1);
  const auto b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(sgn::kernels::matmul_serial(a, b));
}

void BM_MatmulParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, n, 1);
  const auto b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(sgn::kernels::matmul_parallel(a, b));
}

sgn::Vec signal(std::size_t n) {
  sgn::Vec s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = std::sin(0.37 * static_cast<double>(i));
  return s;
}

void BM_DftSerial(benchmark::State& state) {
  const auto s = signal(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sgn::kernels::dft_magnitudes_serial(s));
}

void BM_DftParallel(benchmark::State& state) {
  const auto s = signal(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sgn::kernels::dft_magnitudes_parallel(s));
}

void batch_gradient(benchmark::State& state, bool parallel) {
  const sgn::TaskSpec task = sgn::find_task("bessel");
  const sgn::TaskData data = sgn::make_task_data(task, 0);
  auto model = sgn::make_regressor(sgn::model_spec(sgn::ModelFamily::Sgn, 32, 8), task, 0);
  sgn::GradientSet grads;
  for (auto _ : state) benchmark::DoNotOptimize(model->loss_and_grad(data.train, grads, parallel));
}

void BM_BatchGradientSerial(benchmark::State& state) { batch_gradient(state, false); }
void BM_BatchGradientParallel(benchmark::State& state) { batch_gradient(state, true); }

}  // namespace

BENCHMARK(BM_MatmulSerial)->Arg(64)->Arg(256);
BENCHMARK(BM_MatmulParallel)->Arg(64)->Arg(256);
BENCHMARK(BM_DftSerial)->Arg(1024)->Arg(2048);
BENCHMARK(BM_DftParallel)->Arg(1024)->Arg(2048);
BENCHMARK(BM_BatchGradientSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchGradientParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
