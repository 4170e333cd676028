#include <benchmark/benchmark.h>

#include <numbers>
#include <vector>

#include "mirrors/transposer.hpp"
#include "mirrors/verify.hpp"

using namespace mirrors;

namespace {

// A row of transposer pairs over a guarded floor.
MirrorScene bench_scene() {
  std::vector<EllipseArc> arcs;
  const TransposerPair p = build_pair(-std::numbers::pi / 2, -std::numbers::pi / 6, 0.05, 1.0);
  Aabb box;
  for (Point q : p.hull()) box.expand(q);
  const double s = 0.9 / (box.hi.x1 - box.lo.x1) / 64.0;
  for (int i = 0; i < 64; ++i) {
    for (const EllipseArc& a : p.arcs) arcs.push_back(a.transformed(s, {0.0, 0.0}, {(i + 0.5) / 64.0, 0.0}));
  }
  return MirrorScene(std::move(arcs), {}, GuardWalls{0.1, {0.0, 1.0}});
}

const MirrorScene& scene() {
  static const MirrorScene s = bench_scene();
  return s;
}

void BM_TraceSerial(benchmark::State& state) {
  const auto rays = sample_lambda({0.0, 1.0}, static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(trace_batch_serial(scene(), rays));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_TraceOpenMP(benchmark::State& state) {
  const auto rays = sample_lambda({0.0, 1.0}, static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(trace_batch(scene(), rays));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EmpiricalKernel(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(empirical_kernel(scene(), {0.0, 1.0}, cosine_grid(3), StripLayout{},
                                              static_cast<std::size_t>(state.range(0)), 1));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_TraceSerial)->Arg(1 << 12)->Arg(1 << 16)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_TraceOpenMP)->Arg(1 << 12)->Arg(1 << 16)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_EmpiricalKernel)->Arg(1 << 16)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
