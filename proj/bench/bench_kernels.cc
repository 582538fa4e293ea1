// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include "faastrace/analysis.h"
#include "faastrace/loadcheck.h"
#include "faastrace/rng.h"
#include "faastrace/synth.h"

using namespace faastrace;

namespace {

std::vector<double> walk(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  double v = 0.0;
  for (auto& e : x) e = v += rng.normal();
  return x;
}

const std::vector<ExecutionTrace>& corpus() {
  static const std::vector<ExecutionTrace> traces = [] {
    std::vector<ExecutionTrace> out;
    for (std::uint64_t seed = 0; seed < 4000; ++seed) {
      TraceSpec spec;
      spec.seed = seed;
      spec.cold_probability = 0.2;
      out.push_back(generate(spec).trace);
    }
    return out;
  }();
  return traces;
}

void BM_DtwExactSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = walk(n, 1), b = walk(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(dtw_exact(a, b));
  state.SetComplexityN(state.range(0));
}

void BM_DtwExactParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = walk(n, 1), b = walk(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(dtw_exact_parallel(a, b));
  state.SetComplexityN(state.range(0));
}

void BM_FastDtw(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = walk(n, 1), b = walk(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(fastdtw(a, b, 10));
  state.SetComplexityN(state.range(0));
}

void BM_AnalyzeSerial(benchmark::State& state) {
  const auto& traces = corpus();
  for (auto _ : state) benchmark::DoNotOptimize(analyze_batch_serial(traces));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(traces.size()));
}

void BM_AnalyzeParallel(benchmark::State& state) {
  const auto& traces = corpus();
  for (auto _ : state) benchmark::DoNotOptimize(analyze_batch_parallel(traces));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(traces.size()));
}

}  // namespace

BENCHMARK(BM_DtwExactSerial)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DtwExactParallel)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FastDtw)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AnalyzeSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AnalyzeParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
