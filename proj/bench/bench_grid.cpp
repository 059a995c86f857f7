#include <benchmark/benchmark.h>

#include "dualgeo/fixtures.hpp"
#include "dualgeo/geodesics.hpp"
#include "dualgeo/geometry.hpp"
#include "dualgeo/grid.hpp"
#include "dualgeo/theorems.hpp"

using namespace dualgeo;

namespace {

Metric stereo3() {
  ParseContext c;
  c.dimension = 3;
  const auto f = parse("4/(1 + x1^2 + x2^2 + x3^2)^2", c);
  const auto z = Expression::constant(0.0, 3);
  return Metric({{f, z, z}, {z, f, z}, {z, z, f}});
}

std::vector<Point> points(int per_axis) {
  return grid_points({Point::Constant(3, -1.0), Point::Constant(3, 1.0), per_axis});
}

void BM_RicciSerial(benchmark::State& state) {
  const Metric g = stereo3();
  const auto pts = points(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto r = sweep_serial<Mat>(pts, [&](const Point& p) { return ricci(g, p); });
    benchmark::DoNotOptimize(r.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(pts.size()));
}

void BM_RicciParallel(benchmark::State& state) {
  const Metric g = stereo3();
  const auto pts = points(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto r = sweep<Mat>(pts, [&](const Point& p) { return ricci(g, p); });
    benchmark::DoNotOptimize(r.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(pts.size()));
}

template <bool Parallel>
void BM_TrajectoryBatch(benchmark::State& state) {
  const Fixture f = builtin("sw2");
  const AffineConnection c = connection_for(f, ConnectionTag::PlusT);
  const auto ics = random_initial_conditions(f.chart, static_cast<int>(state.range(0)), 1);
  IntegrationOptions o;
  o.steps = 2000;
  o.domain = &f.chart;
  for (auto _ : state) {
    auto r = Parallel ? integrate_batch(c, ics, o) : integrate_batch_serial(c, ics, o);
    benchmark::DoNotOptimize(r.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_StructureSweep(benchmark::State& state) {
  const Fixture f = builtin("sw2");
  const StructureModel m = f.model();
  const auto pts = f.sample_points(static_cast<int>(state.range(0)));
  auto at = [&](const Point& p) { return m.at(p); };
  for (auto _ : state) {
    auto r = Parallel ? sweep<PointStructure>(pts, at) : sweep_serial<PointStructure>(pts, at);
    benchmark::DoNotOptimize(r.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(pts.size()));
}

}  // namespace

BENCHMARK(BM_TrajectoryBatch<false>)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrajectoryBatch<true>)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StructureSweep<false>)->Arg(9)->Arg(33);
BENCHMARK(BM_StructureSweep<true>)->Arg(9)->Arg(33);
BENCHMARK(BM_RicciSerial)->Arg(5)->Arg(9)->Arg(17);
BENCHMARK(BM_RicciParallel)->Arg(5)->Arg(9)->Arg(17);

BENCHMARK_MAIN();
