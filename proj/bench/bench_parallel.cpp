// Serial vs OpenMP timings for the two parallel kernels.

#include "fixtures.hpp"
#include "fleetplan/bdp.hpp"
#include "fleetplan/policy.hpp"

#include <benchmark/benchmark.h>

using namespace fleetplan;

namespace {

Instance bench_instance() {
    auto inst = fixtures::tiny_instance();
    inst.strategic.cap_fd = inst.strategic.cap_gw = inst.strategic.cap_od = 8;
    inst.strategic.horizon = 6;
    return inst;
}

void bdp_layer_sweep(benchmark::State& state) {
    const auto inst = bench_instance();
    BdpOptions opts;
    opts.parallel = state.range(0) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(bdp_solve(inst, opts).values.data());
    state.SetLabel(opts.parallel ? "parallel" : "serial");
}
BENCHMARK(bdp_layer_sweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void rollouts(benchmark::State& state) {
    const auto inst = bench_instance();
    OpsCostCache cache(inst);
    EvalOptions opts;
    opts.rollouts = 400;
    opts.jobs = static_cast<int>(state.range(0));
    run_policy(cache, Policy::myopic(), inst.initial, opts);  // fill the cache
    for (auto _ : state) benchmark::DoNotOptimize(run_policy(cache, Policy::myopic(), inst.initial, opts).mean);
    state.SetLabel(opts.jobs == 1 ? "serial" : "parallel");
}
BENCHMARK(rollouts)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
