// Parallel kernels against the serial references they are tested against.
#include <benchmark/benchmark.h>

#include "forge/catalog.hpp"
#include "forge/metrics.hpp"
#include "forge/render.hpp"
#include "forge/rng.hpp"
#include "forge/scene.hpp"

using namespace forge;

namespace {

SceneSpec bench_scene() {
    CategorySplit all;
    for (const auto& c : builtin_catalog().categories()) all.seen.insert(c);
    Rng rng(2024);
    return sample_scene(builtin_catalog(), all, Membership::Seen, SamplerConfig{}, rng);
}

RenderSettings bench_settings(int size, int threads) {
    RenderSettings rs;
    rs.resolution = {size, size};
    rs.samples_per_pixel = 4;
    rs.threads = threads;
    return rs;
}

Image noise(int size, std::uint64_t seed) {
    Rng rng(seed);
    Image img(size, size);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
    return img;
}

void BM_RenderBvh(benchmark::State& state) {
    const SceneSpec scene = bench_scene();
    const RenderSettings rs = bench_settings(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
    for (auto _ : state) benchmark::DoNotOptimize(render_radiance(scene, builtin_catalog(), rs, 7));
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void BM_RenderReference(benchmark::State& state) {
    const SceneSpec scene = bench_scene();
    const RenderSettings rs = bench_settings(static_cast<int>(state.range(0)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(reference::render_radiance(scene, builtin_catalog(), rs, 7));
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void BM_Ssim(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Image a = noise(n, 1), b = noise(n, 2);
    for (auto _ : state) benchmark::DoNotOptimize(ssim(a, b));
}

void BM_SsimReference(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Image a = noise(n, 1), b = noise(n, 2);
    for (auto _ : state) benchmark::DoNotOptimize(reference::ssim(a, b, RoiRect::full(n, n)));
}

void BM_Psnr(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Image a = noise(n, 1), b = noise(n, 2);
    for (auto _ : state) benchmark::DoNotOptimize(psnr(a, b));
}

void BM_PsnrReference(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Image a = noise(n, 1), b = noise(n, 2);
    for (auto _ : state) benchmark::DoNotOptimize(reference::psnr(a, b, RoiRect::full(n, n)));
}

}  // namespace

BENCHMARK(BM_RenderBvh)->Args({64, 1})->Args({64, 0})->Args({128, 0})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RenderReference)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ssim)->Arg(256)->Arg(512)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SsimReference)->Arg(256)->Arg(512)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Psnr)->Arg(256)->Arg(512)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_PsnrReference)->Arg(256)->Arg(512)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
