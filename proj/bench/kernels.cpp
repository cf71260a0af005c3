#include <benchmark/benchmark.h>

#include <random>

#include "xstitch/metrics.hpp"
#include "xstitch/seam.hpp"
#include "xstitch/warp.hpp"

using namespace xstitch;

namespace {

Image noise_image(int side, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image img(side, side);
  for (auto& v : img.pixels()) v = u(rng);
  return img;
}

const Homography kWarp = Homography::from_rows({1.01, 0.02, 3.5, -0.015, 0.99, 12.25, 2e-5, -1e-5, 1});

void BM_Warp(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const Image src = noise_image(side, 1);
  const BoundingBox box = warped_bounds(kWarp, side, side).snapped_outward();
  for (auto _ : state) benchmark::DoNotOptimize(warp_image(src, kWarp, box));
  state.SetItemsProcessed(state.iterations() * side * side);
}

void BM_WarpReference(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const Image src = noise_image(side, 1);
  const BoundingBox box = warped_bounds(kWarp, side, side).snapped_outward();
  for (auto _ : state) benchmark::DoNotOptimize(reference::warp_image(src, kWarp, box));
  state.SetItemsProcessed(state.iterations() * side * side);
}

void BM_HybridEnergy(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const Image a = noise_image(side, 2), b = noise_image(side, 3);
  const OrientedGradientExtractor fx;
  for (auto _ : state) benchmark::DoNotOptimize(hybrid_energy(a, b, SeamWeights{}, fx));
  state.SetItemsProcessed(state.iterations() * side * side);
}

void BM_HybridEnergyReference(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const Image a = noise_image(side, 2), b = noise_image(side, 3);
  const OrientedGradientExtractor fx;
  for (auto _ : state) benchmark::DoNotOptimize(reference::hybrid_energy(a, b, SeamWeights{}, fx));
  state.SetItemsProcessed(state.iterations() * side * side);
}

void BM_Ssim(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const Image a = noise_image(side, 4), b = noise_image(side, 5);
  for (auto _ : state) benchmark::DoNotOptimize(ssim(a, b));
  state.SetItemsProcessed(state.iterations() * side * side);
}

void BM_SsimReference(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const Image a = noise_image(side, 4), b = noise_image(side, 5);
  for (auto _ : state) benchmark::DoNotOptimize(reference::ssim(a, b));
  state.SetItemsProcessed(state.iterations() * side * side);
}

}  // namespace

BENCHMARK(BM_Warp)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WarpReference)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HybridEnergy)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HybridEnergyReference)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ssim)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SsimReference)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
