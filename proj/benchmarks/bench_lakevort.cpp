#include <benchmark/benchmark.h>

#include "lakevort/functional.hpp"
#include "lakevort/mode_green.hpp"
#include "lakevort/spectral.hpp"
#include "lakevort/verify.hpp"

using namespace lakevort;

namespace {

const DepthProfile& bump() {
  static const DepthProfile p = make_bump_profile(1.0, 0.5, 2.0);
  return p;
}

}  // namespace

static void BM_ModeGreenBuild(benchmark::State& state) {
  const RadialGrid grid = RadialGrid::for_profile(bump(), 2.0, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(homogeneous_pair(bump(), 8, grid).green(1.0, 1.0));
}
BENCHMARK(BM_ModeGreenBuild)->Arg(1024)->Arg(2048)->Arg(4096)->Unit(benchmark::kMillisecond);

static void BM_FixedPointLambda(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const FixedPointSolver solver(bump(), n, {0.6, 1.0, 1.4});
    benchmark::DoNotOptimize(solver.value(1.0, 1.4));
  }
}
BENCHMARK(BM_FixedPointLambda)->Arg(4)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_FunctionalF(benchmark::State& state) {
  const PatchEvaluator ev(bump(), 3.0);
  const int m = static_cast<int>(state.range(0));
  const FourierContour contour(1.0, m, {0.05, 0.004, 0.0003});
  for (auto _ : state) benchmark::DoNotOptimize(functional_F(ev, 0.4, contour).sup_norm);
}
BENCHMARK(BM_FunctionalF)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_FdSolve(benchmark::State& state) {
  const Grid2D grid(2.0, static_cast<std::size_t>(state.range(0)));
  const Field2D source = patch_source(grid, bump(), FourierContour(1.0, 3, {0.05}));
  const auto zero = [](double, double) { return 0.0; };
  for (auto _ : state) benchmark::DoNotOptimize(fd_solve_2d(bump(), source, zero).values.data());
}
BENCHMARK(BM_FdSolve)->Arg(129)->Arg(257)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
