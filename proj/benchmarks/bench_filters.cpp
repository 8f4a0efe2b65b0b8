// Compares the parallel filter kernels against the serial reference
// implementations on a fixed synthetic input. Build and run:
//   cmake --build build && build/benchmarks/defilter_bench

#include <benchmark/benchmark.h>

#include "defilter/filters.hpp"
#include "defilter/kernel.hpp"
#include "defilter/reference.hpp"
#include "../tests/test_support.hpp"

using namespace defilter;

namespace {

const Image& input() {
    static const Image img = test_support::desk_image(256, 1);
    return img;
}

void bm_convolve_parallel(benchmark::State& state) {
    const Kernel k = gaussian_kernel(2.0, 21);
    for (auto _ : state) {
        benchmark::DoNotOptimize(convolve(input(), k, Boundary::Periodic));
    }
}

void bm_convolve_reference(benchmark::State& state) {
    const Kernel k = gaussian_kernel(2.0, 21);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            reference::convolve(input(), k, Boundary::Periodic));
    }
}

void bm_bilateral_parallel(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(bilateral(input(), 3.0, 0.1, 6));
    }
}

void bm_bilateral_reference(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(reference::bilateral(input(), 3.0, 0.1, 6));
    }
}

void bm_guided_parallel(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(guided(input(), 4, 0.01));
    }
}

void bm_guided_reference(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(reference::guided(input(), 4, 0.01));
    }
}

void bm_median_parallel(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(median_filter(input(), 2));
    }
}

void bm_median_reference(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(reference::median_filter(input(), 2));
    }
}

BENCHMARK(bm_convolve_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_convolve_reference)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_bilateral_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_bilateral_reference)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_guided_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_guided_reference)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_median_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_median_reference)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
