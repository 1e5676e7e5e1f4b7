#include <benchmark/benchmark.h>

#include <random>

#include "mcg/affinity.hpp"
#include "mcg/dncuts.hpp"
#include "mcg/grouping.hpp"
#include "mcg/hierarchy.hpp"
#include "mcg/pareto.hpp"
#include "mcg/pipeline.hpp"

namespace {

// Square cells of random size separated by strong contours, plus noise.
mcg::ContourMap cell_contours(int side, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> step(4, 10);
  std::uniform_real_distribution<double> noise(0.0, 0.1);
  std::vector<bool> cut_row(static_cast<std::size_t>(side), false);
  std::vector<bool> cut_col(static_cast<std::size_t>(side), false);
  for (int i = step(rng); i < side; i += step(rng)) cut_row[static_cast<std::size_t>(i)] = true;
  for (int i = step(rng); i < side; i += step(rng)) cut_col[static_cast<std::size_t>(i)] = true;
  mcg::ContourMap cm({side, side});
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      if (x + 1 < side) cm.right(y, x) = (cut_col[static_cast<std::size_t>(x + 1)] ? 0.8 : 0.0) + noise(rng);
      if (y + 1 < side) cm.down(y, x) = (cut_row[static_cast<std::size_t>(y + 1)] ? 0.8 : 0.0) + noise(rng);
    }
  }
  return cm;
}

void BM_Ncuts(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto a = mcg::build_affinity(cell_contours(side, 1), 5, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(mcg::ncuts(a, 8));
}
BENCHMARK(BM_Ncuts)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Dncuts(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto a = mcg::build_affinity(cell_contours(side, 1), 5, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(mcg::dncuts(a, 2, 8, {side, side}));
}
BENCHMARK(BM_Dncuts)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_BuildUcm(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto cm = cell_contours(side, 2);
  const auto finest = mcg::finest_partition(cm);
  for (auto _ : state) benchmark::DoNotOptimize(mcg::build_ucm(finest, cm));
}
BENCHMARK(BM_BuildUcm)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_EnumerateTuples(benchmark::State& state) {
  const auto cm = cell_contours(64, 3);
  const auto u = mcg::build_ucm(mcg::finest_partition(cm), cm);
  const double floor = mcg::default_strength_floor(u, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mcg::enumerate_tuples(u, 4, floor));
}
BENCHMARK(BM_EnumerateTuples)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_GreedyFront(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  mcg::ParetoCorpus c;
  c.list_count = static_cast<std::size_t>(state.range(0));
  for (int i = 0; i < 10; ++i) {
    c.instance_counts.push_back(3);
    std::vector<std::vector<std::vector<double>>> image(c.list_count);
    for (auto& list : image) {
      for (int p = 0; p < 200; ++p) list.push_back({unit(rng), unit(rng), unit(rng)});
    }
    c.overlaps.push_back(image);
  }
  for (auto _ : state) benchmark::DoNotOptimize(mcg::greedy_front_combine(c, 10));
}
BENCHMARK(BM_GreedyFront)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_SegmentImage(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  mcg::Image img{{side, side}, 3, std::vector<double>(static_cast<std::size_t>(side * side * 3))};
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      for (int ch = 0; ch < 3; ++ch) img.at(y, x, ch) = ((x / 16 + y / 16) % 2 ? 0.8 : 0.2) + 0.05 * unit(rng);
    }
  }
  const mcg::PipelineConfig config;
  for (auto _ : state) benchmark::DoNotOptimize(mcg::segment_image(img, config));
}
BENCHMARK(BM_SegmentImage)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
