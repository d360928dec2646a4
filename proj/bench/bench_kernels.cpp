// Serial reference vs OpenMP path for the parallel kernels.

#include <benchmark/benchmark.h>

#include "sl2c/kernels.hpp"
#include "sl2c/quadrature.hpp"
#include "sl2c/spectral.hpp"

using namespace sl2c;

namespace {

Exec exec_of(const benchmark::State& st) { return st.range(0) ? Exec::parallel : Exec::serial; }

void BM_IntertwiningResidual(benchmark::State& st) {
  Binding b = default_kernel_binding();
  for (auto _ : st)
    benchmark::DoNotOptimize(intertwining_check(Family::B, 3, Sector::holo, b, 100, 42, exec_of(st)).residual);
}

void BM_BaxterResidual(benchmark::State& st) {
  Binding b = default_kernel_binding();
  for (auto _ : st)
    benchmark::DoNotOptimize(baxter_check(Family::D, Family::D, 3, Sector::holo, b, 100, 42, exec_of(st)).residual);
}

void BM_ChainQuadrature(benchmark::State& st) {
  // [z1 - w]^-al [z2 - w]^-be with Re sums 1.2 and 1.3
  const Poly zero(0);
  PowExpr e = PowExpr::power("w", "z1", SymIndex{zero - Poly::var("a"), zero - Poly::var("abar")}) *
              PowExpr::power("w", "z2", SymIndex{zero - Poly::var("b"), zero - Poly::var("bbar")});
  Binding par, pts;
  par.set("a", {0.6, 0.1}).set("abar", {0.6, 0.1}).set("b", {0.65, -0.2}).set("bbar", {0.65, -0.2});
  pts.set("z1", {0.2, 0.1}).set("z2", {-0.6, 0.7});
  QuadOptions o;
  o.tol = 1e-8;
  o.exec = exec_of(st);
  for (auto _ : st) benchmark::DoNotOptimize(integrate2d(e, "w", pts, par, o).value);
}

void BM_MonteCarloBox(benchmark::State& st) {
  auto f = [](const cplx* z) { return std::exp(cplx(0, 1) * (z[0] + std::conj(z[0])).real()); };
  auto g = [](const cplx* z) { return 1.0 / (1.0 + std::norm(z[0])); };
  for (auto _ : st)
    benchmark::DoNotOptimize(box_inner_product(f, g, 1, 2.0, 200'000, 42, exec_of(st)).value);
}

void BM_EnergyTable(benchmark::State& st) {
  SpectrumPoint base;
  base.spin = {0, 0.3};
  base.seps = {{0, 0.0}, {0, 0.25}, {0, 0.5}};
  auto grid = parse_grid("nu=-2:2:0.01,n=-2:2");
  for (auto _ : st)
    benchmark::DoNotOptimize(tabulate(Quantity::qD, Family::D, base, grid, {0.17, 0.05}, exec_of(st)).rows.size());
}

}  // namespace

BENCHMARK(BM_IntertwiningResidual)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BaxterResidual)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ChainQuadrature)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarloBox)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnergyTable)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
