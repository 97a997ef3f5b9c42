// Microbenchmarks for the hot paths: samplers, densities and the posterior.

#include "gmbridge/bayes_engine.hpp"
#include "gmbridge/rng.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

namespace {

using namespace gmb;

std::vector<double> dense_grid(double end, int n) {
    std::vector<double> g;
    for (int k = 0; k <= n; ++k) g.push_back(end * double(k) / double(n));
    return g;
}

void bm_sequential_sampler(benchmark::State& state) {
    const BridgeSpec spec{ou_from_zero(1.0, 1.0), 2.0};
    const auto grid = dense_grid(2.0, 200);
    std::mt19937_64 rng(1);
    for (auto _ : state)
        benchmark::DoNotOptimize(sample_path(spec, grid, rng));
}
BENCHMARK(bm_sequential_sampler)->Unit(benchmark::kMicrosecond);

void bm_joint_sampler(benchmark::State& state) {
    const BridgeSpec spec{ou_from_zero(1.0, 1.0), 2.0};
    const JointSampler sampler(spec, dense_grid(2.0, 200));
    std::mt19937_64 rng(1);
    for (auto _ : state)
        benchmark::DoNotOptimize(sampler.sample(rng));
}
BENCHMARK(bm_joint_sampler)->Unit(benchmark::kMicrosecond);

void bm_random_bridge_batch(benchmark::State& state) {
    const auto m = brownian();
    const auto law = atoms_law({{1.0, 0.5}, {2.0, 0.5}});
    const auto grid = dense_grid(2.0, 200);
    for (auto _ : state)
        benchmark::DoNotOptimize(sample_random_bridge(m, law, grid, 100, 1));
}
BENCHMARK(bm_random_bridge_batch)->Unit(benchmark::kMillisecond);

void bm_log_joint_density(benchmark::State& state) {
    const BridgeSpec spec{ou_from_zero(1.0, 1.0), 2.0};
    const std::vector<double> times{0.3, 0.6, 0.9, 1.2, 1.5};
    const std::vector<double> values{0.1, -0.2, 0.4, 0.0, 0.3};
    for (auto _ : state)
        benchmark::DoNotOptimize(log_joint_density(spec, times, values));
}
BENCHMARK(bm_log_joint_density)->Unit(benchmark::kNanosecond);

void bm_posterior_atoms(benchmark::State& state) {
    const auto m = brownian();
    const auto law = atoms_law({{1.0, 0.5}, {2.0, 0.5}});
    for (auto _ : state) {
        const auto post = posterior_single(m, law, {0.5, 0.8});
        benchmark::DoNotOptimize(post.mean());
    }
}
BENCHMARK(bm_posterior_atoms)->Unit(benchmark::kMicrosecond);

void bm_posterior_continuous(benchmark::State& state) {
    const auto m = ou_from_zero(1.0, 1.0);
    const auto law = mixture_law({{0.4, atoms_law({{2.0, 1.0}})},
                                  {0.6, uniform_law(0.5, 2.0)}});
    for (auto _ : state) {
        const auto post = posterior_single(m, law, {0.4, 0.6});
        benchmark::DoNotOptimize(post.mean());
    }
}
BENCHMARK(bm_posterior_continuous)->Unit(benchmark::kMicrosecond);

void bm_predict(benchmark::State& state) {
    const auto m = brownian();
    const auto law = mixture_law({{0.4, atoms_law({{2.0, 1.0}})},
                                  {0.6, uniform_law(0.5, 2.0)}});
    for (auto _ : state) {
        const auto pred = predict(m, law, {0.4, 0.6}, 1.0);
        benchmark::DoNotOptimize(pred.mean());
    }
}
BENCHMARK(bm_predict)->Unit(benchmark::kMicrosecond);

void bm_length_law_sample(benchmark::State& state) {
    const auto law = mixture_law({{0.4, atoms_law({{2.0, 1.0}})},
                                  {0.6, uniform_law(0.5, 2.0)}});
    std::mt19937_64 rng(1);
    for (auto _ : state)
        benchmark::DoNotOptimize(law.sample(rng));
}
BENCHMARK(bm_length_law_sample)->Unit(benchmark::kNanosecond);

} // namespace

BENCHMARK_MAIN();
