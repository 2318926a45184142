#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "stabcode/lti.hpp"

namespace stabcode {

enum class CodeFamily { IndependentEncodings, MultipleDescriptions };

std::string to_string(CodeFamily f);
CodeFamily code_family_from_string(const std::string& s);

/// A (k, k') stabilizing-code parameterization: k descriptions are emitted
/// per sample and any k' of them give enough SNR to stabilize the loop.
struct CodeSpec {
    int k = 1;
    int k_prime = 1;
    CodeFamily family = CodeFamily::IndependentEncodings;
    double sigma_sq = 0.0;  // per-description coding-noise variance
    double rho = 0.0;       // pairwise noise correlation, 0 for independent encodings
};

/// Norms and noise levels of one operating point of the coded loop.
struct DesignPoint {
    double gamma = 0.0;
    double s_minus_one_norm_sq = 0.0;
    double ly_p21_s_norm_sq = 0.0;
    double p12_f_s_norm_sq = 0.0;
    double nominal_norm_sq = 0.0;
    double sigma_v_sq = 0.0;
    double sigma_q_sq = 0.0;
};

/// SNR of the loop at coding-noise variance sigma_q_sq:
/// |S-1|^2 + |l_y p21 S|^2 / sigma_q_sq. Strictly decreasing in sigma_q_sq.
double gamma_of(const ClosedLoopMaps& maps, double sigma_q_sq);

DesignPoint make_design_point(const ClosedLoopMaps& maps, double sigma_q_sq);

/// Output variance: nominal_norm_sq + p12_f_s_norm_sq * sigma_q_sq.
double performance_sigma_e_sq(const DesignPoint& point);
double performance_sigma_e_sq(const DesignPoint& point, double noise_var);

/// Largest per-description noise variance for which averaging any k'
/// independent encodings still meets the stability SNR.
double max_sigma_indep(int k_prime, const DesignPoint& point);

/// Same bound for pairwise-correlated descriptions (admissible
/// -1/(k-1) < rho <= 0); reduces to max_sigma_indep at rho = 0.
double max_sigma_md(int k, int k_prime, double rho, const DesignPoint& point);

/// Variance of the average of ell descriptions: (sigma^2/ell)(1+(ell-1)rho).
double combined_noise_variance(double sigma_sq, int ell, double rho);

/// Minimum sum-rate of a (k,k') stabilizing code on independent encodings,
/// (k/2) log2(1 + |S-1|^2 / k') bits per sample.
double sum_rate_lower_bound_indep(int k, int k_prime, double s_minus_one_norm_sq);

/// Efficiency log2(1+gamma_all) / (k log2(1+gamma_single)); values outside
/// [0,1] are clamped (and flagged through `clamped` when provided).
double efficiency(int k, double gamma_single, double gamma_all, bool* clamped = nullptr);

/// Efficiency of a minimum sum-rate code on independent encodings;
/// tends to 1 as |S-1|^2 -> 0 and to 1/k as it grows.
double efficiency_min_sum_rate(int k, int k_prime, double s_minus_one_norm_sq);

/// Output variance when ell >= k' descriptions of a minimum sum-rate (k,k')
/// code are combined; strictly decreasing in ell.
double performance_per_received(int ell, int k_prime, const DesignPoint& point);

/// Sum-rate of the correlated-descriptions family for a unit-variance source,
/// as a function of (k, k', sigma^2, rho).
double md_sum_rate(int k, int k_prime, double sigma_sq, double rho);

/// Model SNR when combining ell of k descriptions whose all-k SNR is gamma.
double ladder_snr(int ell, int k, double gamma, double rho);

struct CodePlan {
    CodeSpec spec;
    DesignPoint point;
    std::vector<double> snr_ladder;  // SNR for ell = 1..k
    double quantizer_step = 0.0;     // uniform step realizing sigma_sq (= sqrt(12 sigma^2))
};

/// Composes a (k,k') code on top of designed filters: sigma^2 is set so the
/// all-k SNR equals gamma, giving the ladder SNR(ell) for ell = 1..k, and the
/// SNR at ell = k' is required to clear the stability floor by `epsilon`.
CodePlan plan_code(const PlantModel& plant, const LoopFilters& filters, double gamma, int k,
                   int k_prime, CodeFamily family, double rho, double epsilon = 1e-6);

/// Smallest gamma for which a (k,k') code is feasible (SNR at k' reaches the
/// stability floor), found by bisection to `tol` in gamma.
double feasibility_threshold_gamma(int k, int k_prime, double rho, double s_minus_one_norm_sq,
                                   double tol = 1e-6);

inline double to_db(double x) { return 10.0 * std::log10(x); }
inline double from_db(double x) { return std::pow(10.0, x / 10.0); }

void to_json(nlohmann::json& j, const CodeSpec& c);
void from_json(const nlohmann::json& j, CodeSpec& c);
void to_json(nlohmann::json& j, const CodePlan& p);

}  // namespace stabcode
