// Parallel kernels against their serial reference loops.

#include <benchmark/benchmark.h>

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "segprof/correlation.hpp"
#include "segprof/features.hpp"
#include "segprof/stats.hpp"
#include "segprof/ward.hpp"

using namespace segprof;

namespace {

FeatureMatrix random_features(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  FeatureMatrix fm;
  fm.values = Matrix(n, d);
  for (auto& x : fm.values.data) x = normal(rng);
  for (std::size_t k = 0; k < d; ++k) {
    ColumnMeta meta;
    meta.variable = "f" + std::to_string(k + 1);
    fm.columns.push_back(meta);
  }
  for (std::size_t r = 0; r < n; ++r) fm.row_ids.push_back("r" + std::to_string(r + 1));
  fm.standardization.resize(d);
  return fm;
}

void BM_WardParallel(benchmark::State& state) {
  const auto fm = random_features(static_cast<std::size_t>(state.range(0)), 40, 1);
  for (auto _ : state) benchmark::DoNotOptimize(ward_cluster(fm));
}

void BM_WardSerial(benchmark::State& state) {
  const auto fm = random_features(static_cast<std::size_t>(state.range(0)), 40, 1);
  for (auto _ : state) benchmark::DoNotOptimize(serial::ward_cluster(fm));
}

template <bool Parallel>
void BM_Profile(benchmark::State& state) {
  const auto fm = random_features(static_cast<std::size_t>(state.range(0)), 60, 2);
  const auto asg = cut_k(ward_cluster(fm), 4);
  const StatsConfig cfg;
  for (auto _ : state) {
    if constexpr (Parallel)
      benchmark::DoNotOptimize(profile_clusters(fm, asg, cfg));
    else
      benchmark::DoNotOptimize(serial::profile_clusters(fm, asg, cfg));
  }
}

template <bool Parallel>
void BM_Correlation(benchmark::State& state) {
  const auto fm = random_features(static_cast<std::size_t>(state.range(0)), 60, 3);
  std::vector<std::string> names;
  std::vector<std::vector<double>> series;
  for (std::size_t k = 0; k < fm.cols(); ++k) {
    names.push_back(fm.columns[k].name());
    series.push_back(fm.values.column(k));
  }
  for (auto _ : state) {
    if constexpr (Parallel)
      benchmark::DoNotOptimize(correlate_series(names, series));
    else
      benchmark::DoNotOptimize(serial::correlate_series(names, series));
  }
}

template <bool Parallel>
void BM_Zscore(benchmark::State& state) {
  const auto fm = random_features(static_cast<std::size_t>(state.range(0)), 200, 4);
  for (auto _ : state) {
    if constexpr (Parallel)
      benchmark::DoNotOptimize(zscore(fm));
    else
      benchmark::DoNotOptimize(serial::zscore(fm));
  }
}

}  // namespace

BENCHMARK(BM_WardParallel)->Arg(300)->Arg(600)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WardSerial)->Arg(300)->Arg(600)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Profile<true>)->Arg(300)->Arg(3000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Profile<false>)->Arg(300)->Arg(3000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Correlation<true>)->Arg(300)->Arg(3000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Correlation<false>)->Arg(300)->Arg(3000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Zscore<true>)->Arg(300)->Arg(10000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Zscore<false>)->Arg(300)->Arg(10000)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
