#include <benchmark/benchmark.h>

#include "robinshape/pdesolve.hpp"
#include "robinshape/radial.hpp"
#include "robinshape/shapeopt.hpp"

using namespace robinshape;

static void BM_LinearSolve2D(benchmark::State& state) {
    IntegrandModel m;
    m.f = ScalarField::constant(1.0);
    const Grid g = Grid::box(2, static_cast<int>(state.range(0)), 1.0);
    const ShapeMask mask = ShapeMask::ball(g, {0.5, 0.5}, 0.4);
    for (auto _ : state) benchmark::DoNotOptimize(solve_inner(m, mask).energy);
}
BENCHMARK(BM_LinearSolve2D)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_NonlinearSolve2D(benchmark::State& state) {
    IntegrandModel m;
    m.f = ScalarField::constant(1.0);
    m.p = 3.0;
    const Grid g = Grid::box(2, static_cast<int>(state.range(0)), 1.0);
    const ShapeMask mask = ShapeMask::full(g);
    for (auto _ : state) benchmark::DoNotOptimize(solve_inner(m, mask).energy);
}
BENCHMARK(BM_NonlinearSolve2D)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_Shooting(benchmark::State& state) {
    RadialEigenvalueQuery q;
    q.d = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(robin_eigenvalue_ball(q).lambda);
}
BENCHMARK(BM_Shooting)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

static void BM_AnnealSweeps1D(benchmark::State& state) {
    IntegrandModel m;
    m.f = ScalarField::box_indicator(3.0, {0.4, -1.0}, {0.6, 1.0});
    m.c0 = 0.2;
    const Grid g = Grid::box(1, static_cast<int>(state.range(0)), 1.0);
    AnnealSchedule s;
    s.sweeps = 20;
    for (auto _ : state) benchmark::DoNotOptimize(optimize_shape(m, ShapeMask::full(g), s).J);
}
BENCHMARK(BM_AnnealSweeps1D)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_AnnealSweeps2D(benchmark::State& state) {
    IntegrandModel m;
    m.f = ScalarField::box_indicator(3.0, {0.3, 0.3}, {0.7, 0.7});
    m.c0 = 0.2;
    const Grid g = Grid::box(2, 32, 1.0);
    AnnealSchedule s;
    s.sweeps = 5;
    for (auto _ : state) benchmark::DoNotOptimize(optimize_shape(m, ShapeMask::full(g), s).J);
}
BENCHMARK(BM_AnnealSweeps2D)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
