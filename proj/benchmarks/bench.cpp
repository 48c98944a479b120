#include <benchmark/benchmark.h>

#include "zigzag/exact.hpp"
#include "zigzag/integrator.hpp"
#include "zigzag/lattice.hpp"
#include "zigzag/su11.hpp"

namespace {

using namespace zigzag;

const DimensionlessParams kAmplified{1.0, 1.8, 2.0, 0.15};

std::vector<double> linspace(double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = hi * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

void BM_Rhs(benchmark::State& state) {
  const int sites = static_cast<int>(state.range(0));
  const RhsStencil stencil(kAmplified, sites);
  std::vector<Complex> psi(static_cast<std::size_t>(sites), Complex(0.1, -0.2)),
      dpsi(psi.size());
  for (auto _ : state) {
    stencil(psi, dpsi);
    benchmark::DoNotOptimize(dpsi.data());
  }
  state.SetItemsProcessed(state.iterations() * sites);
}
BENCHMARK(BM_Rhs)->Arg(60)->Arg(240);

void BM_IntegrateBlochPeriod(benchmark::State& state) {
  IntegratorConfig cfg;
  cfg.z_grid = {0.0, 6.58};
  for (auto _ : state) {
    const Trajectory traj = integrate(single_site_state(5, 60), kAmplified, cfg);
    benchmark::DoNotOptimize(traj.states.back().amplitudes.data());
  }
}
BENCHMARK(BM_IntegrateBlochPeriod)->Unit(benchmark::kMillisecond);

void BM_ZFactors(benchmark::State& state) {
  const SolverContext ctx = make_context(kAmplified);
  double z = 0.0;
  for (auto _ : state) {
    z += 1e-3;
    benchmark::DoNotOptimize(z_factors(z, ctx));
  }
}
BENCHMARK(BM_ZFactors);

void BM_Amplitude(benchmark::State& state) {
  const SolverContext ctx = make_context(kAmplified);
  const ZFactors zf = z_factors(static_cast<double>(state.range(0)), ctx);
  for (auto _ : state) {
    ColumnEvaluator column(zf, 5, TruncationPolicy{});
    benchmark::DoNotOptimize(column.at(25).value);
  }
}
BENCHMARK(BM_Amplitude)->Arg(3)->Arg(10);

void BM_IntensityColumn(benchmark::State& state) {
  const SolverContext ctx = make_context(kAmplified);
  const ZFactors zf = z_factors(5.0, ctx);
  for (auto _ : state) {
    ColumnEvaluator column(zf, 5, TruncationPolicy{});
    double sum = 0.0;
    for (int m = 0; m <= 40; ++m) sum += std::norm(column.at(m).value);
    benchmark::DoNotOptimize(sum);
  }
}
BENCHMARK(BM_IntensityColumn);

void BM_IntensityMapThreaded(benchmark::State& state) {
  const SolverContext ctx = make_context(kAmplified);
  const std::vector<double> grid = linspace(10.0, 101);
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const PropagationGrid map = intensity_map(5, grid, 0, 40, ctx, {}, threads);
    benchmark::DoNotOptimize(map.cells.data());
  }
}
BENCHMARK(BM_IntensityMapThreaded)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_DenseOracle(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const DenseOperator u = dense_oracle(kAmplified, dim, 3.2);
    benchmark::DoNotOptimize(u.at(5, 5));
  }
}
BENCHMARK(BM_DenseOracle)->Arg(80)->Unit(benchmark::kMillisecond);

void BM_Disentangle(benchmark::State& state) {
  const TripleCoefficients t{Complex(0.0, 0.3), Complex(0.0, 2.0), Complex(0.0, 0.3)};
  for (auto _ : state) benchmark::DoNotOptimize(disentangle(t));
}
BENCHMARK(BM_Disentangle);

}  // namespace

BENCHMARK_MAIN();
