#include <doctest.h>

#include <cmath>

#include "stabcode/code_design.hpp"
#include "stabcode/synthesis.hpp"

using namespace stabcode;

namespace {

PlantModel bench_plant() {
    return PlantModel::from_siso(TransferFunction::from_zpk({}, {2.0, 0.5789}, 0.165));
}

SynthesisConfig config_for(double gamma) {
    SynthesisConfig cfg;
    cfg.gamma_target = gamma;
    return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("synthesis");

TEST_CASE("benchmark plant at gamma 7.2") {
    const SynthesisReport rep = synthesize_filters(bench_plant(), config_for(7.2));
    CHECK(rep.internally_stable);
    CHECK(rep.achieved_gamma >= 7.2 * 0.98);
    CHECK(rep.achieved_gamma <= 7.2 * 1.02);
    CHECK(rep.sigma_q_sq > 0.0);

    const ClosedLoopMaps maps = closed_loop_maps(bench_plant(), rep.filters);
    const double s1 = h2_norm_sq((maps.s - TransferFunction::constant(1.0)).simplified());
    CHECK(s1 >= 3.0 - 1e-9);  // the floor for this plant
    CHECK(s1 <= 3.0 + 1e-6);  // reflection design attains it
}

TEST_CASE("gamma below the stability SNR is rejected") {
    CHECK_THROWS_WITH_AS(synthesize_filters(bench_plant(), config_for(2.9)),
                         doctest::Contains("below stability SNR"), std::domain_error);
    CHECK_THROWS_AS(synthesize_filters(bench_plant(), config_for(3.0)), std::domain_error);
}

TEST_CASE("stable plant accepts any positive gamma") {
    const PlantModel plant = PlantModel::from_siso(TransferFunction::from_zpk({}, {0.5}, 1.0));
    const SynthesisReport rep = synthesize_filters(plant, config_for(0.5));
    CHECK(rep.internally_stable);
    CHECK(rep.achieved_gamma == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("achieved gamma is reproduced by the closed-loop formula") {
    for (double gamma : {4.0, 7.2, 12.0}) {
        const SynthesisReport rep = synthesize_filters(bench_plant(), config_for(gamma));
        const ClosedLoopMaps maps = closed_loop_maps(bench_plant(), rep.filters);
        const double check = gamma_of(maps, rep.sigma_q_sq);
        CHECK(std::abs(check - rep.achieved_gamma) <= 1e-6 * rep.achieved_gamma);
    }
}

TEST_CASE("performance is monotone in the SNR budget") {
    double prev = 0.0;
    bool first = true;
    for (double gamma : {3.5, 4.0, 5.29, 7.2, 10.0, 20.0}) {
        const SynthesisReport rep = synthesize_filters(bench_plant(), config_for(gamma));
        if (!first) CHECK(rep.achieved_sigma_e_sq <= prev * 1.01);
        prev = rep.achieved_sigma_e_sq;
        first = false;
    }
}

TEST_CASE("required noise power diverges at the feasibility boundary") {
    // sigma_q^2 = |l_y p21 S|^2 / (gamma - |S-1|^2) forces 1/gap divergence:
    // halving the gap roughly doubles the required noise budget. (A faster
    // blowup is impossible while the filters stay bounded.)
    const double floor = min_snr_for_stability(bench_plant());
    const double g0 = 0.8;
    double prev_sigma = 0.0;
    double gap = g0;
    for (int i = 0; i < 3; ++i) {
        const SynthesisReport rep = synthesize_filters(bench_plant(), config_for(floor + gap));
        if (i > 0) {
            CHECK(rep.sigma_q_sq >= prev_sigma * 1.8);
            CHECK(rep.sigma_q_sq <= prev_sigma * 2.6);
        }
        prev_sigma = rep.sigma_q_sq;
        gap *= 0.5;
    }
    // the product sigma_q^2 * gap stays bounded, pinning the 1/gap rate
    const SynthesisReport tight = synthesize_filters(bench_plant(), config_for(floor + 1e-3));
    CHECK(tight.sigma_q_sq * 1e-3 < 100.0);
    CHECK(tight.sigma_q_sq > 100.0);
}

TEST_CASE("two unstable poles: |S-1|^2 reaches the product bound from above") {
    const PlantModel plant = PlantModel::from_siso(TransferFunction::from_zpk({}, {2.0, 3.0}, 1.0));
    CHECK(min_snr_for_stability(plant) == doctest::Approx(35.0));
    for (double gamma : {36.0, 40.0, 60.0}) {
        const SynthesisReport rep = synthesize_filters(plant, config_for(gamma));
        const ClosedLoopMaps maps = closed_loop_maps(plant, rep.filters);
        const double s1 = h2_norm_sq((maps.s - TransferFunction::constant(1.0)).simplified());
        CHECK(s1 >= 35.0 - 1e-6);
        CHECK(s1 <= 35.0 + 1e-4);
        CHECK(rep.internally_stable);
    }
}

TEST_CASE("internal stability verdicts") {
    SUBCASE("open loop, unstable plant") {
        const StabilityReport rep = verify_internal_stability(bench_plant(), LoopFilters::zero());
        CHECK_FALSE(rep.stable);
        bool has_dy = false;
        for (const auto& p : rep.unstable_paths) has_dy |= (p == "d->y");
        CHECK(has_dy);
    }
    SUBCASE("open loop, stable plant") {
        const PlantModel plant = PlantModel::from_siso(TransferFunction::from_zpk({}, {0.5}, 1.0));
        CHECK(verify_internal_stability(plant, LoopFilters::zero()).stable);
    }
    SUBCASE("synthesized filters") {
        const SynthesisReport rep = synthesize_filters(bench_plant(), config_for(7.2));
        const StabilityReport stab = verify_internal_stability(bench_plant(), rep.filters);
        CHECK(stab.stable);
        CHECK(stab.unstable_paths.empty());
    }
}

TEST_CASE("fir order must be positive") {
    SynthesisConfig cfg = config_for(7.2);
    cfg.fir_order = 0;
    CHECK_THROWS_AS(synthesize_filters(bench_plant(), cfg), std::invalid_argument);
}

TEST_SUITE_END();
