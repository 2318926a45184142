#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "stabcode/lti.hpp"

namespace stabcode {

struct SynthesisConfig {
    double gamma_target = 0.0;       // linear SNR budget, not dB
    int fir_order = 32;              // length of the FIR free parameter
    int truncation_horizon = 512;    // impulse-response length for the least-squares stage
    double bisection_tolerance = 1e-6;
    int max_iterations = 40;
};

struct SynthesisReport {
    LoopFilters filters;
    double achieved_gamma = 0.0;
    double achieved_sigma_e_sq = 0.0;
    double sigma_q_sq = 0.0;  // coding-noise variance that realizes achieved_gamma
    bool internally_stable = false;
    int iterations = 0;
};

/// Thrown when the solver cannot meet the target; carries the best iterate.
class SynthesisFailure : public std::runtime_error {
public:
    SynthesisFailure(const std::string& what, SynthesisReport best)
        : std::runtime_error(what), best_iterate(std::move(best)) {}
    SynthesisReport best_iterate;
};

struct StabilityReport {
    bool stable = false;
    std::vector<std::string> unstable_paths;
};

/// Designs filters (f, l_w, l_y) that internally stabilize the plant with
/// SNR budget gamma_target. The plant's unstable dynamics are cancelled into
/// a stable closed-loop characteristic polynomial (unstable poles reflected
/// into the unit disc), the residual freedom is an FIR parameter chosen by
/// least squares to minimize the predicted output variance, and the
/// coding-noise variance is back-computed so the SNR budget is met exactly.
///
/// Throws std::domain_error("below stability SNR") for infeasible targets and
/// SynthesisFailure (carrying the best iterate) on non-convergence.
SynthesisReport synthesize_filters(const PlantModel& plant, const SynthesisConfig& config);

/// Checks stability of every closed-loop signal path (d,q) -> (e,y,v,w,u)
/// and lists the unstable ones.
StabilityReport verify_internal_stability(const PlantModel& plant, const LoopFilters& filters);

void to_json(nlohmann::json& j, const SynthesisReport& r);

}  // namespace stabcode
