#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stabcode/channel.hpp"
#include "stabcode/code_design.hpp"
#include "stabcode/lti.hpp"
#include "stabcode/quantization.hpp"

namespace stabcode {

/// What sits between v and w in the loop.
enum class CoderKind { Independent, MultipleDescriptions, Repetition, AdditiveGaussian };

std::string to_string(CoderKind kind);
CoderKind coder_kind_from_string(const std::string& s);

/// Decoder behavior when no description survives a time step.
enum class ZeroReceptionPolicy { ZeroFill, HoldPrevious };

struct SimConfig {
    PlantModel plant;
    LoopFilters filters;
    CodeSpec code;
    CoderKind coder = CoderKind::Independent;
    double quantizer_step = 1.0;       // Independent / Repetition
    IndexAssignment assignment;        // MultipleDescriptions
    double awgn_sigma_q_sq = 0.0;      // AdditiveGaussian
    ErasureChannel channel;
    std::uint64_t horizon = 1000000;
    std::uint64_t burn_in = 1000;
    std::uint64_t disturbance_seed = 1;
    std::uint64_t dither_seed = 2;
    double divergence_threshold = 1e9;
    ZeroReceptionPolicy zero_policy = ZeroReceptionPolicy::ZeroFill;
    int min_guaranteed_received = 0;   // reinstates lowest indices, test hook
    bool measure_ladder = true;
};

struct SimMetrics {
    double sigma_e_sq_hat = 0.0;
    double sigma_v_sq_hat = 0.0;
    std::vector<double> snr_per_ell;       // counterfactual, ell = 1..k
    double snr_all = 0.0;                  // ell = k entry
    double entropy_per_description = 0.0;  // mean over descriptions, bits
    double sum_rate_hat = 0.0;             // bits per sample across descriptions
    double rho_hat = 0.0;                  // mean pairwise error correlation
    bool diverged = false;
    std::uint64_t samples_used = 0;
};

/// One seeded closed-loop run: white Gaussian disturbance, plant update,
/// coder, erasure channel, decoder, control filter, metric accumulation.
/// Deterministic given the config (including all seeds).
SimMetrics run_closed_loop(const SimConfig& config);

struct SweepRow {
    std::size_t scheme_index = 0;
    double loss_probability = 0.0;
    SimMetrics metrics;
    bool failed = false;
    std::string error;
};

/// Runs every (config, p) cell; failures are flagged rows, never aborts.
/// Rows are ordered by (scheme, p) regardless of execution order.
std::vector<SweepRow> run_sweep(const std::vector<SimConfig>& configs,
                                const std::vector<double>& loss_grid, int threads = 0);

struct ComparisonReport {
    std::vector<double> ladder_predicted;
    std::vector<double> ladder_measured;
    std::vector<double> ladder_rel_dev;
    double sigma_e_predicted = 0.0;
    double sigma_e_measured = 0.0;
    double sigma_e_rel_dev = 0.0;
    double gamma_predicted = 0.0;
    double gamma_measured = 0.0;
    double gamma_rel_dev = 0.0;
    bool valid = false;
};

/// Cross-validates the closed-form design predictions against a zero-loss
/// Monte Carlo run of the same configuration.
ComparisonReport theoretical_vs_measured(const SimConfig& config);

}  // namespace stabcode
