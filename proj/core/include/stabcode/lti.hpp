#pragma once

#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "stabcode/transfer_function.hpp"

namespace stabcode {

/// Default stability margin: a pole is "stable" iff |p| <= 1 - margin.
inline constexpr double kStabilityMargin = 1e-7;

/// Two-input/two-output plant block mapping (d, u) -> (e, y):
///   e = p11 d + p12 u,  y = p21 d + p22 u.
struct PlantModel {
    TransferFunction p11, p12, p21, p22;

    /// Plant whose scalar output y = g (u + d) is also the error signal,
    /// the common disturbance-at-the-input configuration.
    static PlantModel from_siso(const TransferFunction& g) { return {g, g, g, g}; }
};

/// The coder/controller filter triple: u = f w, w = v + q,
/// v = l_w z^-1 w + l_y y.
struct LoopFilters {
    TransferFunction f, l_w, l_y;

    static LoopFilters zero() { return {TransferFunction(), TransferFunction(), TransferFunction()}; }
};

/// Closed-loop maps of the coded control loop.
///   s          : q -> w sensitivity, (1 - l_w z^-1 - p22 f l_y)^-1
///   k          : equivalent controller f l_y (1 - l_w z^-1)^-1
///   l_y_p21_s  : d -> v signal map driving the coder
///   p12_f_s    : q -> e coding-noise-to-error map
///   nominal    : d -> e noise-free disturbance map
struct ClosedLoopMaps {
    TransferFunction s;
    TransferFunction k;
    TransferFunction l_y_p21_s;
    TransferFunction p12_f_s;
    TransferFunction nominal;
    bool internally_stable = false;
};

bool is_stable(const TransferFunction& tf, double margin = kStabilityMargin);

/// Squared H2 norm: impulse-response energy sum(h[n]^2), the output variance
/// under unit-variance white input. Computed by a state-space Lyapunov solve
/// and cross-checked against an adaptively truncated impulse sum (relative
/// 1e-8). Throws if the function is unstable.
double h2_norm_sq(const TransferFunction& tf);

/// Truncated impulse-response energy with an adaptive horizon; exposed for
/// use as an independent check of `h2_norm_sq`.
double h2_norm_sq_truncated(const TransferFunction& tf);

/// Builds the closed-loop maps for the given plant/filters. Throws if the
/// loop is ill-posed (zero constant term in 1 - l_w z^-1 - p22 f l_y).
ClosedLoopMaps closed_loop_maps(const PlantModel& plant, const LoopFilters& filters);

/// Infimum of |S-1|^2 over stabilizing configurations: prod |p_i|^2 - 1 over
/// the unstable poles of p22, and 0 for stable plants. Throws for poles on
/// the unit circle (the infimum is not attained).
double min_snr_for_stability(const PlantModel& plant);

void to_json(nlohmann::json& j, const PlantModel& p);
void from_json(const nlohmann::json& j, PlantModel& p);
void to_json(nlohmann::json& j, const LoopFilters& f);
void from_json(const nlohmann::json& j, LoopFilters& f);

}  // namespace stabcode
