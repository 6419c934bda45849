// Serial reference vs OpenMP kernels.
//
//   ./bench_kernels --benchmark_filter=Sweep
//   OMP_NUM_THREADS=4 ./bench_kernels

#include <benchmark/benchmark.h>

#include "edgesim/harness.hpp"

using namespace edgesim;

namespace {

const Dynamics& default_dynamics()
{
    static const Dynamics dyn(default_config());
    return dyn;
}

const ValueTables& default_tables()
{
    static const ValueTables t = value_iteration(default_dynamics());
    return t;
}

void BM_SweepReference(benchmark::State& state)
{
    const auto& dyn = default_dynamics();
    std::vector<double> in(default_tables().cost_to_go), out;
    std::vector<int> policy;
    for (auto _ : state) benchmark::DoNotOptimize(bellman_sweep_reference(dyn, in, out, policy));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(dyn.n_states()));
}
BENCHMARK(BM_SweepReference)->Unit(benchmark::kMillisecond);

void BM_SweepParallel(benchmark::State& state)
{
    const auto& dyn = default_dynamics();
    std::vector<double> in(default_tables().cost_to_go), out;
    std::vector<int> policy;
    for (auto _ : state) benchmark::DoNotOptimize(bellman_sweep(dyn, in, out, policy));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(dyn.n_states()));
}
BENCHMARK(BM_SweepParallel)->Unit(benchmark::kMillisecond);

void BM_PdsValueReference(benchmark::State& state)
{
    const auto& dyn = default_dynamics();
    for (auto _ : state) benchmark::DoNotOptimize(pds_value_reference(dyn, default_tables().cost_to_go));
}
BENCHMARK(BM_PdsValueReference)->Unit(benchmark::kMillisecond);

void BM_PdsValueParallel(benchmark::State& state)
{
    const auto& dyn = default_dynamics();
    for (auto _ : state) benchmark::DoNotOptimize(pds_value(dyn, default_tables().cost_to_go));
}
BENCHMARK(BM_PdsValueParallel)->Unit(benchmark::kMillisecond);

void BM_ValueIteration(benchmark::State& state)
{
    const auto& dyn = default_dynamics();
    for (auto _ : state) benchmark::DoNotOptimize(value_iteration(dyn).iterations);
}
BENCHMARK(BM_ValueIteration)->Unit(benchmark::kMillisecond);

// Replica-parallel simulation of the PDS learner; range(0) = runs.
void BM_SimulatePds(benchmark::State& state)
{
    static const Experiment exp(default_config());
    const Scheme pds = parse_scheme(exp.config(), "pds");
    const RunOptions opts{1000, static_cast<std::uint64_t>(state.range(0)), 1};
    for (auto _ : state) benchmark::DoNotOptimize(simulate(exp, pds, opts).final_running_average());
    state.SetItemsProcessed(state.iterations() * state.range(0) * 1000);
}
BENCHMARK(BM_SimulatePds)->Arg(1)->Arg(8)->Arg(30)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
