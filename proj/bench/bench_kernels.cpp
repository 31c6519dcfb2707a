// Blocked OpenMP kernels against the serial reference loops.
//
//   fraceig_bench [--benchmark_filter=...]
//
// Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <vector>

#include "fraceig/network.hpp"
#include "fraceig/reference.hpp"

using namespace fraceig;

namespace {

struct Fixture {
  NetworkParams params;
  EvalPoints points;
};

// Interval (d=1, m=40) for arg 0, L-shape (d=2, m=60 with corner features) for arg 1.
Fixture make(int problem, std::size_t n) {
  const Domain domain = problem == 0 ? Domain::interval(-1.0, 1.0) : Domain::lshape();
  const FeatureSet features = problem == 0 ? FeatureSet::standard(domain, 40, 0.5, 3.0)
                                           : FeatureSet::standard(domain, 40, 0.5, 3.0, 20);
  const Architecture arch{domain.dim(), 3, static_cast<int>(features.size())};
  const SamplingRegion region = default_sampling_region(domain);
  SplitMix64 rng = StreamKey(11).generator(0);
  PointSet xs(domain.dim(), 0);
  std::vector<double> x(domain.dim());
  while (xs.size() < n) {
    uniform_point(region, rng, x);
    if (domain.contains(x)) xs.push_back(x);
  }
  return {init_params(arch, StreamKey(12)), prepare_points(features, std::move(xs))};
}

double quadratic(std::span<const double> u, std::span<double> du) {
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    sum += u[i] * u[i];
    du[i] = 2.0 * u[i];
  }
  return sum;
}

void args(benchmark::internal::Benchmark* b) {
  for (int problem : {0, 1}) {
    for (int n : {1000, 8000, 32000}) b->Args({problem, n});
  }
  b->ArgNames({"problem", "n"})->Unit(benchmark::kMillisecond);
}

void BM_forward_blocked(benchmark::State& state) {
  const Fixture f = make(static_cast<int>(state.range(0)), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(forward_batch(f.params, f.points));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

void BM_forward_reference(benchmark::State& state) {
  const Fixture f = make(static_cast<int>(state.range(0)), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(reference::forward_batch(f.params, f.points));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

void BM_gradient_blocked(benchmark::State& state) {
  const Fixture f = make(static_cast<int>(state.range(0)), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(loss_gradient(f.params, f.points, quadratic));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

void BM_gradient_reference(benchmark::State& state) {
  const Fixture f = make(static_cast<int>(state.range(0)), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(reference::loss_gradient(f.params, f.points, quadratic));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

}  // namespace

BENCHMARK(BM_forward_blocked)->Apply(args);
BENCHMARK(BM_forward_reference)->Apply(args);
BENCHMARK(BM_gradient_blocked)->Apply(args);
BENCHMARK(BM_gradient_reference)->Apply(args);

BENCHMARK_MAIN();
