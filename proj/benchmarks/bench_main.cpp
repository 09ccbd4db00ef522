#include <benchmark/benchmark.h>

#include "hmin/examples.hpp"
#include "hmin/foliation.hpp"
#include "hmin/geometry.hpp"
#include "hmin/operators.hpp"
#include "hmin/solver.hpp"

using namespace hmin;

namespace {

GridFunction benchmark_state(int n) {
  const CatalogEntry e = logcosh_benchmark();
  return GridFunction::sample(Grid(e.x1_range, e.x2_range, n, n), e.eval);
}

void BM_ResidualDiv(benchmark::State& state) {
  const Frame f(0.1, benchmark_state(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(residual_div(f));
  state.SetComplexityN(state.range(0) * state.range(0));
}
BENCHMARK(BM_ResidualDiv)->Arg(33)->Arg(65)->Arg(129)->Arg(257)->Complexity();

void BM_JacobianAssemble(benchmark::State& state) {
  const Frame f(0.1, benchmark_state(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(jacobian_assemble(f));
  state.SetComplexityN(state.range(0) * state.range(0));
}
BENCHMARK(BM_JacobianAssemble)->Arg(33)->Arg(65)->Arg(129)->Arg(257)->Complexity();

void BM_SolveEps(benchmark::State& state) {
  const CatalogEntry e = logcosh_benchmark();
  const int n = static_cast<int>(state.range(0));
  const Grid g(e.x1_range, e.x2_range, n, n);
  for (auto _ : state) benchmark::DoNotOptimize(solve_eps(g, e.eval, 0.1, {}));
}
BENCHMARK(BM_SolveEps)->Arg(33)->Arg(65)->Arg(129)->Unit(benchmark::kMillisecond);

// Continuation reuses the previous eps as the initial guess, so later steps are cheap.
void BM_Continuation(benchmark::State& state) {
  const CatalogEntry e = logcosh_benchmark();
  const Grid g(e.x1_range, e.x2_range, 65, 65);
  for (auto _ : state) benchmark::DoNotOptimize(continuation(g, e.eval, {}, {}));
}
BENCHMARK(BM_Continuation)->Unit(benchmark::kMillisecond);

void BM_TraceLeaf(benchmark::State& state) {
  const GridFunction u = benchmark_state(129);
  const Point start{2.0, 0.1};
  for (auto _ : state) benchmark::DoNotOptimize(trace_leaf(u, start, {-1, 1}, 0.5 * u.grid().h1()));
}
BENCHMARK(BM_TraceLeaf);

void BM_DistOracle(benchmark::State& state) {
  const Grid g = Grid::unit_square(65);
  const Frame f(0.4, GridFunction::sample(g, [](Point p) { return 0.5 * p.x1 + 0.2 * p.x2; }));
  const FrozenFrame ff = taylor_p1(f, g.node(32, 32));
  const double delta = 0.04 / static_cast<double>(state.range(0));
  const LiftedPoint p{{ff.x0.x1 + 0.08, ff.x0.x2 + 0.04 * ff.u0 + 0.4 * 3.2e-3}, 0.08};
  for (auto _ : state) benchmark::DoNotOptimize(dist_oracle(ff, p, delta));
}
BENCHMARK(BM_DistOracle)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
