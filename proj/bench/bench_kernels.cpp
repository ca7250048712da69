#include <benchmark/benchmark.h>

#include <omp.h>

#include "reynet/data.hpp"
#include "reynet/kernels.hpp"
#include "reynet/network.hpp"

using namespace reynet;

namespace {

struct Fixture {
  Network net;
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;
};

Fixture make(ModelKind kind, int n) {
  const Dataset ds = generate(Task::symmetry, n, 100, 7);
  return {Network::create(kind, Task::symmetry, n, NetworkOptions{}, 1), dataset_inputs(ds), dataset_targets(ds)};
}

void forward(benchmark::State& state, ModelKind kind, Exec exec) {
  const auto f = make(kind, static_cast<int>(state.range(0)));
  set_kernel_threads(exec == Exec::parallel ? omp_get_max_threads() : 1);
  for (auto _ : state) benchmark::DoNotOptimize(f.net.predict(f.x, exec));
  state.SetItemsProcessed(state.iterations() * f.x.cols());
}

void step(benchmark::State& state, ModelKind kind, Exec exec) {
  const auto f = make(kind, static_cast<int>(state.range(0)));
  set_kernel_threads(exec == Exec::parallel ? omp_get_max_threads() : 1);
  for (auto _ : state) {
    auto grads = f.net.zero_grads();
    benchmark::DoNotOptimize(f.net.loss_and_grad(f.x, f.y, LossKind::standard_mse, grads, exec));
  }
  state.SetItemsProcessed(state.iterations() * f.x.cols());
}

}  // namespace

BENCHMARK_CAPTURE(forward, red_serial, ModelKind::red_reynet, Exec::serial)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(forward, red_parallel, ModelKind::red_reynet, Exec::parallel)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(step, red_serial, ModelKind::red_reynet, Exec::serial)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(step, red_parallel, ModelKind::red_reynet, Exec::parallel)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(step, full_serial, ModelKind::reynet, Exec::serial)->Arg(5)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(step, full_parallel, ModelKind::reynet, Exec::parallel)->Arg(5)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
