#include <benchmark/benchmark.h>

#include "stabcode/code_design.hpp"
#include "stabcode/quantization.hpp"
#include "stabcode/simulation.hpp"
#include "stabcode/synthesis.hpp"

namespace {

using namespace stabcode;

PlantModel bench_plant() {
    return PlantModel::from_siso(TransferFunction::from_zpk({}, {2.0, 0.5789}, 0.165));
}

SynthesisReport bench_filters(double gamma) {
    SynthesisConfig cfg;
    cfg.gamma_target = gamma;
    return synthesize_filters(bench_plant(), cfg);
}

void BM_h2_norm_sq(benchmark::State& state) {
    const TransferFunction tf =
        TransferFunction::from_zpk({}, {0.9, 0.5, -0.3, 0.7, -0.6, 0.2, 0.85, -0.1}, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(h2_norm_sq(tf));
}
BENCHMARK(BM_h2_norm_sq);

void BM_poles_degree16(benchmark::State& state) {
    std::vector<std::complex<double>> poles;
    for (int i = 0; i < 16; ++i) poles.emplace_back(0.9 * std::cos(0.3 * i + 0.1), 0.0);
    const TransferFunction tf = TransferFunction::from_zpk({}, poles, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(tf.poles());
}
BENCHMARK(BM_poles_degree16);

void BM_synthesize_filters(benchmark::State& state) {
    const PlantModel plant = bench_plant();
    SynthesisConfig cfg;
    cfg.gamma_target = 7.2;
    cfg.fir_order = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(synthesize_filters(plant, cfg));
}
BENCHMARK(BM_synthesize_filters)->Arg(8)->Arg(32);

void BM_build_index_assignment(benchmark::State& state) {
    for (auto _ : state)
        benchmark::DoNotOptimize(build_index_assignment(static_cast<int>(state.range(0)), 3, 0.5));
}
BENCHMARK(BM_build_index_assignment)->Arg(5)->Arg(15)->Arg(25);

void BM_closed_loop_steps(benchmark::State& state) {
    const SynthesisReport rep = bench_filters(7.2);
    const CodePlan plan = plan_code(bench_plant(), rep.filters, 7.2, 3, 2,
                                    CodeFamily::IndependentEncodings, 0.0);
    SimConfig sim;
    sim.plant = bench_plant();
    sim.filters = rep.filters;
    sim.code = plan.spec;
    sim.coder = CoderKind::Independent;
    sim.quantizer_step = plan.quantizer_step;
    sim.channel = {0.05, 11};
    sim.horizon = static_cast<std::uint64_t>(state.range(0));
    sim.burn_in = 0;
    for (auto _ : state) benchmark::DoNotOptimize(run_closed_loop(sim));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_closed_loop_steps)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_md_encode_decode(benchmark::State& state) {
    const IndexAssignment ia = build_index_assignment(5, 3, 0.25);
    std::uint64_t t = 0;
    const std::vector<int> pair{1, 3};
    for (auto _ : state) {
        const DescriptionSet ds = md_encode(0.37, ia, t++);
        benchmark::DoNotOptimize(md_decode(ds, ia, pair));
    }
}
BENCHMARK(BM_md_encode_decode);

}  // namespace

BENCHMARK_MAIN();
