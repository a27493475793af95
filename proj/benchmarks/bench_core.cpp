#include <benchmark/benchmark.h>

#include "lyap/grid.hpp"
#include "lyap/interval.hpp"
#include "lyap/lyapunov_flow.hpp"
#include "lyap/odeint.hpp"
#include "lyap/systems.hpp"

using lyap::Interval;
using lyap::IntervalVector;

static void BM_IntervalMulAdd(benchmark::State& state) {
  Interval a(0.1, 0.2), b(-0.3, 0.7), c(1.0, 1.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(a);
    benchmark::DoNotOptimize(b);
    Interval r = a * b + c;
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_IntervalMulAdd);

static void BM_IntervalDiv(benchmark::State& state) {
  Interval a(0.1, 0.2), b(1.5, 2.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(a);
    benchmark::DoNotOptimize(a / b);
  }
}
BENCHMARK(BM_IntervalDiv);

static void BM_QuadForm(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  lyap::Mat y = lyap::Mat::Random(n, n);
  y = (y + y.transpose()).eval();
  IntervalVector v(static_cast<std::size_t>(n), Interval(-0.1, 0.1));
  for (auto _ : state) benchmark::DoNotOptimize(lyap::quad_form(v, y));
}
BENCHMARK(BM_QuadForm)->Arg(2)->Arg(3)->Arg(6);

static void BM_LohnerStep(benchmark::State& state) {
  auto f = lyap::builtin("rossler", lyap::default_parameters("rossler"));
  lyap::IntegratorConfig cfg;
  cfg.taylor_order = static_cast<int>(state.range(0));
  IntervalVector x0{Interval(-3.34, -3.3399), Interval(-0.04, -0.0399), Interval(0.0393, 0.0394)};
  for (auto _ : state) {
    lyap::LohnerSolver s(f, x0, cfg);
    benchmark::DoNotOptimize(s.step(Interval(0.003)));
  }
}
BENCHMARK(BM_LohnerStep)->Arg(3)->Arg(5)->Arg(8);

static void BM_Stage1Sweep(benchmark::State& state) {
  auto f = lyap::builtin("fitzhugh_nagumo", lyap::default_parameters("fitzhugh_nagumo"));
  auto q = lyap::build_quadratic_flow(f, lyap::Vec::Zero(3));
  const auto k = static_cast<std::size_t>(state.range(0));
  lyap::Grid grid(IntervalVector(3, Interval(-0.5, 0.5)), {k, k, k});
  for (auto _ : state) benchmark::DoNotOptimize(lyap::sweep_flow(f, q, grid, {1}).certified_count());
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * grid.size()));
}
BENCHMARK(BM_Stage1Sweep)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
