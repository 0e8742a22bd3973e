#include "belnet/operators.hpp"
#include "belnet/pde.hpp"

#include <benchmark/benchmark.h>

#include <numbers>
#include <random>

using namespace belnet::ops;
using belnet::nn::Activation;

namespace {

OperatorSample make_sample(int n, int d_in, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  OperatorSample s;
  s.sensors.locations.resize(n, d_in);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d_in; ++j) s.sensors.locations(i, j) = unit(rng);
  s.input_values.resize(n);
  for (int i = 0; i < n; ++i) s.input_values[i] = unit(rng);
  s.query.resize(d);
  for (int j = 0; j < d; ++j) s.query[j] = unit(rng);
  s.target = unit(rng);
  return s;
}

OperatorModel make_bench_model(ArchKind kind) {
  BelNetDims dims;
  dims.N = 25;
  dims.d_in = 1;
  dims.d = 2;
  dims.C = 8;
  dims.K = 8;
  dims.I = 16;
  dims.proj_hidden = 24;
  const Normalizer norm = Normalizer::identity(1, 2);
  switch (kind) {
    case ArchKind::BelNet:
      return OperatorModel(init_belnet(dims, Activation::Tanh, 1), norm);
    case ArchKind::VanillaBelNet:
      return OperatorModel(init_vanilla_belnet(dims, Activation::Tanh, 1), norm);
    case ArchKind::DeepOnet:
      return OperatorModel(init_deeponet(25, 8, 32, 2, Activation::Tanh, 1),
                           norm);
  }
  throw std::logic_error("unreachable");
}

void bench_forward(benchmark::State& state, ArchKind kind) {
  const OperatorModel model = make_bench_model(kind);
  const OperatorSample s = make_sample(25, 1, 2, 7);
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(s));
}

void bench_forward_backward(benchmark::State& state, ArchKind kind) {
  const OperatorModel model = make_bench_model(kind);
  const OperatorSample s = make_sample(25, 1, 2, 7);
  Eigen::VectorXd grad(model.param_count());
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.forward_backward(s, 1.0, grad));
    benchmark::ClobberMemory();
  }
}

void bench_burgers_solve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  belnet::pde::Grid1d mesh{0.0, 2.0 * std::numbers::pi, n, true};
  const auto ic = belnet::pde::burgers_ic(2.0, mesh);
  for (auto _ : state)
    benchmark::DoNotOptimize(belnet::pde::burgers_solve(ic, 0.1));
}

void bench_elliptic2d(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(belnet::pde::elliptic2d_solve(
        [](double x, double y) { return belnet::pde::kappa_onefast(x, y, 0.125); },
        [](double, double) { return 1.0; }, n));
}

}  // namespace

BENCHMARK_CAPTURE(bench_forward, belnet, ArchKind::BelNet);
BENCHMARK_CAPTURE(bench_forward, vanilla, ArchKind::VanillaBelNet);
BENCHMARK_CAPTURE(bench_forward, deeponet, ArchKind::DeepOnet);
BENCHMARK_CAPTURE(bench_forward_backward, belnet, ArchKind::BelNet);
BENCHMARK_CAPTURE(bench_forward_backward, vanilla, ArchKind::VanillaBelNet);
BENCHMARK_CAPTURE(bench_forward_backward, deeponet, ArchKind::DeepOnet);
BENCHMARK(bench_burgers_solve)->Arg(128)->Arg(256)->Arg(512);
BENCHMARK(bench_elliptic2d)->Arg(32)->Arg(64);

BENCHMARK_MAIN();
