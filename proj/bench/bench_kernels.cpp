// OpenMP kernels against their serial references, and the reduced collision
// kernel against the dense pair computation.

#include <benchmark/benchmark.h>

#include "serfsim/meanfield.hpp"
#include "serfsim/optimize.hpp"
#include "serfsim/pair_collision.hpp"

using namespace serf;

namespace {

collision::McConfig mc_config()
{
    collision::McConfig c;
    c.spin = NuclearSpin::three_halves();
    c.P0 = 0.3;
    c.R_se = 1e6;
    c.gamma_e = dual::default_gamma_e;
    c.B_z = 0.05 * c.R_se / c.gamma_e;
    c.duration = 200.0 / c.R_se;
    c.samples = 101;
    c.n_trajectories = 32;
    return c;
}

void BM_mc_parallel(benchmark::State& s)
{
    const auto c = mc_config();
    for (auto _ : s)
        benchmark::DoNotOptimize(collision::mc_evolve(c, collision::Execution::parallel));
}

void BM_mc_serial(benchmark::State& s)
{
    const auto c = mc_config();
    for (auto _ : s)
        benchmark::DoNotOptimize(collision::mc_evolve(c, collision::Execution::serial));
}

void BM_mc_dense(benchmark::State& s)
{
    auto c = mc_config();
    c.n_trajectories = 4;
    for (auto _ : s)
        benchmark::DoNotOptimize(collision::mc_evolve_dense(c));
}

void BM_mc_kernel_same_work(benchmark::State& s)
{
    auto c = mc_config();
    c.n_trajectories = 4;
    for (auto _ : s)
        benchmark::DoNotOptimize(collision::mc_evolve(c, collision::Execution::serial));
}

opt::OptimizeSpec map_spec()
{
    opt::OptimizeSpec spec;
    spec.n_K_grid = opt::log_grid(1e10, 1e13, 6);
    spec.n_H_grid = opt::log_grid(1e14, 1e18, 6);
    return spec;
}

void BM_map_parallel(benchmark::State& s)
{
    const auto spec = map_spec();
    for (auto _ : s)
        benchmark::DoNotOptimize(opt::sensitivity_map(spec));
}

void BM_map_serial(benchmark::State& s)
{
    const auto spec = map_spec();
    for (auto _ : s)
        benchmark::DoNotOptimize(opt::sensitivity_map_serial(spec));
}

meanfield::MeanFieldParams sweep_params()
{
    meanfield::MeanFieldParams p;
    p.spin = NuclearSpin{5};
    p.gamma_e = dual::default_gamma_e;
    return p;
}

void BM_sweep_parallel(benchmark::State& s)
{
    const auto p = sweep_params();
    const auto grid = meanfield::field_grid_for_ratio(p, 1e-3, 1e3, 64);
    for (auto _ : s)
        benchmark::DoNotOptimize(meanfield::sweep_field(p, grid));
}

void BM_sweep_serial(benchmark::State& s)
{
    const auto p = sweep_params();
    const auto grid = meanfield::field_grid_for_ratio(p, 1e-3, 1e3, 64);
    for (auto _ : s)
        benchmark::DoNotOptimize(meanfield::sweep_field_serial(p, grid));
}

} // namespace

BENCHMARK(BM_mc_parallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_mc_serial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_mc_kernel_same_work)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_mc_dense)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_map_parallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_map_serial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_sweep_parallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_sweep_serial)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
