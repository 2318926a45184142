#include "stabcode/code_design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace stabcode {

namespace {

void check_rho(int k, double rho) {
    if (k < 2) {
        if (rho != 0.0) throw std::invalid_argument("rho must be 0 for a single description");
        return;
    }
    if (!(rho > -1.0 / (k - 1) && rho <= 0.0))
        throw std::invalid_argument("rho outside the admissible range (-1/(k-1), 0]");
}

void check_kkp(int k, int k_prime) {
    if (k < 1 || k_prime < 1 || k_prime > k)
        throw std::invalid_argument("require 1 <= k' <= k");
}

}  // namespace

std::string to_string(CodeFamily f) {
    return f == CodeFamily::IndependentEncodings ? "independent" : "multiple_descriptions";
}

CodeFamily code_family_from_string(const std::string& s) {
    if (s == "independent" || s == "independent_encodings") return CodeFamily::IndependentEncodings;
    if (s == "multiple_descriptions" || s == "md") return CodeFamily::MultipleDescriptions;
    throw std::invalid_argument("unknown code family: " + s);
}

double gamma_of(const ClosedLoopMaps& maps, double sigma_q_sq) {
    if (sigma_q_sq <= 0.0) throw std::invalid_argument("sigma_q_sq must be positive");
    if (!maps.internally_stable) throw std::domain_error("gamma undefined for unstable closed loop");
    const double s1 = h2_norm_sq((maps.s - TransferFunction::constant(1.0)).simplified());
    const double m = h2_norm_sq(maps.l_y_p21_s);
    return s1 + m / sigma_q_sq;
}

DesignPoint make_design_point(const ClosedLoopMaps& maps, double sigma_q_sq) {
    if (sigma_q_sq <= 0.0) throw std::invalid_argument("sigma_q_sq must be positive");
    if (!maps.internally_stable) throw std::domain_error("design point requires a stable closed loop");
    DesignPoint p;
    p.s_minus_one_norm_sq = h2_norm_sq((maps.s - TransferFunction::constant(1.0)).simplified());
    p.ly_p21_s_norm_sq = h2_norm_sq(maps.l_y_p21_s);
    p.p12_f_s_norm_sq = h2_norm_sq(maps.p12_f_s);
    p.nominal_norm_sq = h2_norm_sq(maps.nominal);
    p.sigma_q_sq = sigma_q_sq;
    p.gamma = p.s_minus_one_norm_sq + p.ly_p21_s_norm_sq / sigma_q_sq;
    p.sigma_v_sq = p.gamma * sigma_q_sq;
    return p;
}

double performance_sigma_e_sq(const DesignPoint& point) {
    return performance_sigma_e_sq(point, point.sigma_q_sq);
}

double performance_sigma_e_sq(const DesignPoint& point, double noise_var) {
    return point.nominal_norm_sq + point.p12_f_s_norm_sq * noise_var;
}

double max_sigma_indep(int k_prime, const DesignPoint& point) {
    if (k_prime < 1) throw std::invalid_argument("k_prime must be >= 1");
    const double s1 = point.s_minus_one_norm_sq;
    if (point.gamma <= s1) throw std::domain_error("infeasible: gamma does not exceed |S-1|^2");
    if (s1 == 0.0) return std::numeric_limits<double>::infinity();
    return point.gamma * k_prime * point.ly_p21_s_norm_sq / (s1 * (point.gamma - s1));
}

double max_sigma_md(int k, int k_prime, double rho, const DesignPoint& point) {
    check_kkp(k, k_prime);
    check_rho(k, rho);
    return max_sigma_indep(k_prime, point) / (1.0 + (k_prime - 1) * rho);
}

double combined_noise_variance(double sigma_sq, int ell, double rho) {
    if (ell < 1) throw std::invalid_argument("ell must be >= 1");
    return sigma_sq / ell * (1.0 + (ell - 1) * rho);
}

double sum_rate_lower_bound_indep(int k, int k_prime, double s_minus_one_norm_sq) {
    check_kkp(k, k_prime);
    return 0.5 * k * std::log2(1.0 + s_minus_one_norm_sq / k_prime);
}

double efficiency(int k, double gamma_single, double gamma_all, bool* clamped) {
    if (k < 1 || gamma_single <= 0.0 || gamma_all <= 0.0)
        throw std::invalid_argument("efficiency requires k >= 1 and positive SNRs");
    const double eta = std::log2(1.0 + gamma_all) / (k * std::log2(1.0 + gamma_single));
    const bool out_of_range = eta < 0.0 || eta > 1.0;
    if (clamped) *clamped = out_of_range;
    return std::clamp(eta, 0.0, 1.0);
}

double efficiency_min_sum_rate(int k, int k_prime, double s_minus_one_norm_sq) {
    check_kkp(k, k_prime);
    const double s = s_minus_one_norm_sq;
    if (s < 0.0) throw std::invalid_argument("|S-1|^2 must be non-negative");
    if (s == 0.0) return 1.0;  // limit value
    return std::log2(1.0 + static_cast<double>(k) / k_prime * s) /
           (k * std::log2(1.0 + s / k_prime));
}

double performance_per_received(int ell, int k_prime, const DesignPoint& point) {
    if (k_prime < 1 || ell < 1) throw std::invalid_argument("require ell >= 1 and k' >= 1");
    if (ell < k_prime)
        throw std::domain_error("below stabilization threshold: need ell >= k' descriptions");
    const double s1 = point.s_minus_one_norm_sq;
    if (point.gamma <= s1) throw std::domain_error("infeasible: gamma does not exceed |S-1|^2");
    const double excess = k_prime * point.gamma * point.p12_f_s_norm_sq * point.ly_p21_s_norm_sq /
                          (ell * s1 * (point.gamma - s1));
    return point.nominal_norm_sq + excess;
}

double md_sum_rate(int k, int k_prime, double sigma_sq, double rho) {
    check_kkp(k, k_prime);
    if (sigma_sq <= 0.0) throw std::invalid_argument("sigma_sq must be positive");
    if (k >= 2 && rho <= -1.0 / (k - 1))
        throw std::invalid_argument("rho at or below -1/(k-1): covariance not positive definite");
    if (rho > 0.0) throw std::invalid_argument("rho must be <= 0");
    const double t1 = std::log2((k_prime + sigma_sq * (1.0 + (k_prime - 1) * rho)) /
                                (sigma_sq * (1.0 - rho))) /
                      (2.0 * k_prime);
    const double t2 =
        k >= 2 ? std::log2((1.0 - rho) / (1.0 + (k - 1) * rho)) / (2.0 * k) : 0.0;
    return t1 + t2;
}

double ladder_snr(int ell, int k, double gamma, double rho) {
    check_kkp(k, ell);
    check_rho(k, rho);
    return static_cast<double>(ell) / k * gamma * (1.0 + (k - 1) * rho) / (1.0 + (ell - 1) * rho);
}

CodePlan plan_code(const PlantModel& plant, const LoopFilters& filters, double gamma, int k,
                   int k_prime, CodeFamily family, double rho, double epsilon) {
    check_kkp(k, k_prime);
    if (family == CodeFamily::IndependentEncodings && rho != 0.0)
        throw std::invalid_argument("independent encodings require rho = 0");
    check_rho(k, rho);

    const ClosedLoopMaps maps = closed_loop_maps(plant, filters);
    if (!maps.internally_stable) throw std::domain_error("filters do not internally stabilize the plant");

    const double s1 = h2_norm_sq((maps.s - TransferFunction::constant(1.0)).simplified());
    if (gamma <= s1) throw std::domain_error("infeasible: gamma does not exceed |S-1|^2");

    const double snr_at_kp = ladder_snr(k_prime, k, gamma, rho);
    if (snr_at_kp < s1 + epsilon)
        throw std::domain_error("infeasible: combining k' descriptions stays below the stability SNR");

    // sigma_q of the all-k operating point; the loop runs at SNR gamma when
    // every description arrives.
    const double m = h2_norm_sq(maps.l_y_p21_s);
    const double sigma_q_sq = m / (gamma - s1);

    CodePlan plan;
    plan.point = make_design_point(maps, sigma_q_sq);
    plan.spec.k = k;
    plan.spec.k_prime = k_prime;
    plan.spec.family = family;
    plan.spec.rho = rho;
    plan.spec.sigma_sq = k * plan.point.sigma_v_sq / (gamma * (1.0 + (k - 1) * rho));
    plan.quantizer_step = std::sqrt(12.0 * plan.spec.sigma_sq);
    plan.snr_ladder.resize(static_cast<std::size_t>(k));
    for (int ell = 1; ell <= k; ++ell)
        plan.snr_ladder[static_cast<std::size_t>(ell - 1)] = ladder_snr(ell, k, gamma, rho);
    return plan;
}

double feasibility_threshold_gamma(int k, int k_prime, double rho, double s_minus_one_norm_sq,
                                   double tol) {
    check_kkp(k, k_prime);
    check_rho(k, rho);
    const double s = s_minus_one_norm_sq;
    if (s <= 0.0) return 0.0;
    auto feasible = [&](double gamma) { return ladder_snr(k_prime, k, gamma, rho) >= s; };
    double lo = s, hi = s;
    while (!feasible(hi)) {
        hi *= 2.0;
        if (hi > 1e18) throw std::runtime_error("feasibility bracket exhausted");
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? hi : lo) = mid;
    }
    return hi;
}

void to_json(nlohmann::json& j, const CodeSpec& c) {
    j = nlohmann::json{{"k", c.k},
                       {"k_prime", c.k_prime},
                       {"family", to_string(c.family)},
                       {"sigma_sq", c.sigma_sq},
                       {"rho", c.rho}};
}

void from_json(const nlohmann::json& j, CodeSpec& c) {
    j.at("k").get_to(c.k);
    j.at("k_prime").get_to(c.k_prime);
    c.family = code_family_from_string(j.at("family").get<std::string>());
    c.sigma_sq = j.value("sigma_sq", 0.0);
    c.rho = j.value("rho", 0.0);
}

void to_json(nlohmann::json& j, const CodePlan& p) {
    j = nlohmann::json{{"code", p.spec},
                       {"gamma", p.point.gamma},
                       {"s_minus_one_norm_sq", p.point.s_minus_one_norm_sq},
                       {"sigma_v_sq", p.point.sigma_v_sq},
                       {"sigma_q_sq", p.point.sigma_q_sq},
                       {"snr_ladder", p.snr_ladder},
                       {"quantizer_step", p.quantizer_step}};
}

}  // namespace stabcode
