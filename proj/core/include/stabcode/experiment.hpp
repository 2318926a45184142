#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stabcode/io.hpp"
#include "stabcode/simulation.hpp"
#include "stabcode/synthesis.hpp"

namespace stabcode {

/// CLI exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitValidationError = 2,
    kExitInfeasible = 3,
    kExitAllRowsFailed = 4,
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// How a scheme's quantizer step is chosen.
struct CalibrationSpec {
    std::string mode = "ladder";  // ladder | single_snr | match_step | step
    double single_snr_target = 0.0;
    double step = 0.0;
    std::string of;  // match_step: name of the scheme whose step is shared
};

struct SchemeSpec {
    std::string name;
    CoderKind coder = CoderKind::Independent;
    int k = 1;
    int k_prime = 1;
    double rho = 0.0;
    int nesting = 5;  // MD only
    CalibrationSpec calibration;
    double awgn_sigma_q_sq = 0.0;  // additive_gaussian only; 0 = design value
};

/// Fully self-describing experiment: config + binary reproduce every output
/// byte.
struct ExperimentConfig {
    PlantModel plant;
    SynthesisConfig synthesis;

    // design command
    int design_k = 4;
    int design_k_prime = 2;
    CodeFamily design_family = CodeFamily::IndependentEncodings;
    double design_rho = 0.0;
    double sweep_min_db = 0.0;
    double sweep_max_db = 20.0;
    int sweep_points = 81;

    // simulate command
    std::vector<SchemeSpec> schemes;
    std::vector<double> loss_grid{0.0};
    std::uint64_t channel_seed = 3;
    std::uint64_t horizon = 1000000;
    std::uint64_t burn_in = 1000;
    std::uint64_t disturbance_seed = 1;
    std::uint64_t dither_seed = 2;
    double divergence_threshold = 1e9;
    ZeroReceptionPolicy zero_policy = ZeroReceptionPolicy::ZeroFill;

    std::string output_path;
    std::string config_hash;  // of the canonical config text

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_file(const std::string& path);
    void override_seeds(std::uint64_t base);
};

struct AnalysisResult {
    double s_minus_one_norm_sq = 0.0;
    double min_snr = 0.0;
    double min_rate_bits = 0.0;
    double achieved_gamma = 0.0;
    double predicted_sigma_e_sq = 0.0;
    double sigma_q_sq = 0.0;
    double min_sum_rate_bound_bits = 0.0;
    double efficiency_at_min_sum_rate = 0.0;
    std::vector<std::string> unstable_paths;
    nlohmann::json to_json() const;
};

struct DesignResult {
    nlohmann::json plan;
    CsvTable ladder_sweep;
    double feasibility_threshold = 0.0;
};

struct SimulateResult {
    CsvTable table;
    std::string summary;
    std::size_t failed_rows = 0;
    std::size_t total_rows = 0;
};

AnalysisResult run_analyze(const ExperimentConfig& cfg);
DesignResult run_design(const ExperimentConfig& cfg);
SimulateResult run_simulate(const ExperimentConfig& cfg, int threads = 0);

/// Builds the per-scheme simulation configs (synthesis included); exposed so
/// tests can drive the exact CLI pipeline.
std::vector<SimConfig> build_sim_configs(const ExperimentConfig& cfg,
                                         const SynthesisReport& synthesis);

std::string toolkit_version();

}  // namespace stabcode
