#include "stabcode/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace stabcode {

namespace {

using poly_t = std::vector<double>;

// Reflects unstable roots into the unit disc: each z-plane pole p with
// |p| > 1 becomes 1/conj(p). Roots live in the w = z^-1 variable here, so
// the rule reads w -> 1/conj(w) for |w| < 1. The result is normalized to a
// unit constant term.
poly_t reflected_characteristic(const poly_t& a) {
    auto w_roots = poly::roots(a);
    for (auto& w : w_roots) {
        if (std::abs(w) < 1.0) w = 1.0 / std::conj(w);
    }
    poly_t c = poly::from_roots(w_roots, 1.0);
    const double c0 = c[0];
    for (double& v : c) v /= c0;
    return c;
}

// Least-squares solution of a*x - b*y = c over polynomials in z^-1.
struct DiophantinePair {
    poly_t x, y;
};

DiophantinePair solve_diophantine(const poly_t& a, const poly_t& b, const poly_t& c) {
    const int deg_a = static_cast<int>(poly::degree(a));
    const int deg_b = static_cast<int>(poly::degree(b));
    const int deg_c = static_cast<int>(poly::degree(c));
    const int dy = std::max(deg_a - 1, 0);
    const int dx = std::max({deg_c - deg_a, deg_b + dy - deg_a, 0});
    const int rows = std::max({deg_a + dx, deg_b + dy, deg_c}) + 1;
    const int cols = dx + 1 + dy + 1;

    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
    for (int j = 0; j <= dx; ++j)
        for (int i = 0; i <= deg_a; ++i) m(i + j, j) = a[static_cast<std::size_t>(i)];
    for (int j = 0; j <= dy; ++j)
        for (int i = 0; i <= deg_b; ++i) m(i + j, dx + 1 + j) = -b[static_cast<std::size_t>(i)];
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);
    for (int i = 0; i <= deg_c; ++i) rhs(i) = c[static_cast<std::size_t>(i)];

    const Eigen::VectorXd sol = m.colPivHouseholderQr().solve(rhs);
    const double residual = (m * sol - rhs).norm();
    if (residual > 1e-8 * std::max(1.0, rhs.norm()))
        throw std::runtime_error("pole-placement equation insoluble (plant factors not coprime?)");

    DiophantinePair out;
    out.x.assign(sol.data(), sol.data() + dx + 1);
    out.y.assign(sol.data() + dx + 1, sol.data() + cols);
    out.x = poly::trim(out.x, 1e-14);
    out.y = poly::trim(out.y, 1e-14);
    return out;
}

std::vector<double> stable_impulse(const TransferFunction& tf, int horizon, const char* what) {
    const TransferFunction s = tf.simplified();
    if (!is_stable(s))
        throw std::domain_error(std::string("plant structure leaves an unstable path through ") + what);
    return s.impulse_response(static_cast<std::size_t>(horizon));
}

LoopFilters filters_from_pair(const poly_t& x, const poly_t& y) {
    const double s = x.empty() ? 0.0 : x[0];
    if (std::abs(s) < 1e-12) throw std::runtime_error("ill-posed controller factor (zero constant term)");
    poly_t xs = poly::scale(x, 1.0 / s);
    poly_t ys = poly::scale(y, 1.0 / s);
    poly_t lw(xs.size() > 1 ? xs.size() - 1 : 1, 0.0);
    for (std::size_t i = 1; i < xs.size(); ++i) lw[i - 1] = -xs[i];
    LoopFilters f;
    f.f = TransferFunction::constant(1.0);
    f.l_w = TransferFunction(lw, {1.0});
    f.l_y = TransferFunction(ys, {1.0});
    return f;
}

}  // namespace

SynthesisReport synthesize_filters(const PlantModel& plant, const SynthesisConfig& config) {
    if (config.fir_order < 1) throw std::invalid_argument("fir_order must be >= 1");
    if (config.gamma_target <= 0.0) throw std::invalid_argument("gamma_target must be positive");

    const double snr_floor = min_snr_for_stability(plant);
    if (config.gamma_target <= snr_floor)
        throw std::domain_error("below stability SNR");

    const TransferFunction p22 = plant.p22.simplified();
    const poly_t a = p22.den();
    const poly_t b = p22.num();
    const poly_t cl = reflected_characteristic(a);

    const DiophantinePair base = solve_diophantine(a, b, cl);

    // Affine pieces of the two quadratic objectives: the d->e map
    // p11 + p12 p21 (a/cl) y  and the d->v map  p21 (a/cl) y,
    // with y = y0 + a * t over FIR parameters t.
    const TransferFunction a_over_cl(a, cl);
    const TransferFunction col_core = (plant.p21 * TransferFunction(poly::mul(a, a), cl)).simplified();
    const TransferFunction n_col_tf = (plant.p12 * col_core).simplified();
    const TransferFunction m_col_tf = col_core;
    const TransferFunction n_base_tf =
        (plant.p11 + plant.p12 * plant.p21 * TransferFunction(poly::mul(a, base.y), cl)).simplified();
    const TransferFunction m_base_tf =
        (plant.p21 * TransferFunction(poly::mul(a, base.y), cl)).simplified();

    // The noise-to-error weight |p12 f S|^2 does not depend on t for this
    // decomposition, so the constrained problem reduces to one weighted
    // least-squares solve with a known multiplier.
    const TransferFunction p12fs = (plant.p12 * a_over_cl).simplified();
    if (!is_stable(p12fs))
        throw std::domain_error("plant structure leaves an unstable path through p12");
    const double p12fs_norm = h2_norm_sq(p12fs);
    const TransferFunction s_tf = a_over_cl;
    const double s_minus_one_norm = h2_norm_sq((s_tf - TransferFunction::constant(1.0)).simplified());
    const double gap = config.gamma_target - s_minus_one_norm;
    if (gap <= 0.0) throw std::domain_error("below stability SNR");
    const double multiplier = p12fs_norm / gap;

    const int t_len = config.fir_order;
    int horizon = std::max(config.truncation_horizon, t_len + 8);
    SynthesisReport report;
    int iterations = 0;

    while (true) {
        ++iterations;
        const auto h_nb = stable_impulse(n_base_tf, horizon, "p11/p12");
        const auto h_mb = stable_impulse(m_base_tf, horizon, "p21");
        const auto h_nc = stable_impulse(n_col_tf, horizon, "p12*p21");
        const auto h_mc = stable_impulse(m_col_tf, horizon, "p21");

        const double w2 = std::sqrt(multiplier);
        Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(2 * horizon, t_len);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * horizon);
        for (int r = 0; r < horizon; ++r) {
            rhs(r) = -h_nb[static_cast<std::size_t>(r)];
            rhs(horizon + r) = -w2 * h_mb[static_cast<std::size_t>(r)];
            for (int j = 0; j < t_len && j <= r; ++j) {
                lhs(r, j) = h_nc[static_cast<std::size_t>(r - j)];
                lhs(horizon + r, j) = w2 * h_mc[static_cast<std::size_t>(r - j)];
            }
        }
        const Eigen::VectorXd t = lhs.colPivHouseholderQr().solve(rhs);

        poly_t t_poly(t.data(), t.data() + t_len);
        t_poly = poly::trim(t_poly, 1e-15);
        const poly_t x = poly::trim(poly::add(base.x, poly::mul(b, t_poly)), 1e-14);
        const poly_t y = poly::trim(poly::add(base.y, poly::mul(a, t_poly)), 1e-14);

        report.filters = filters_from_pair(x, y);
        const ClosedLoopMaps maps = closed_loop_maps(plant, report.filters);
        const double m_norm = h2_norm_sq(maps.l_y_p21_s);
        const double s1_norm = h2_norm_sq((maps.s - TransferFunction::constant(1.0)).simplified());
        const double gap_actual = config.gamma_target - s1_norm;
        if (gap_actual <= 0.0)
            throw SynthesisFailure("achieved |S-1|^2 exceeds gamma target", report);

        report.sigma_q_sq = m_norm / gap_actual;
        report.achieved_gamma = s1_norm + (report.sigma_q_sq > 0.0 ? m_norm / report.sigma_q_sq : 0.0);
        report.achieved_sigma_e_sq =
            h2_norm_sq(maps.nominal) + h2_norm_sq(maps.p12_f_s) * report.sigma_q_sq;
        report.internally_stable = verify_internal_stability(plant, report.filters).stable;
        report.iterations = iterations;

        // Horizon adequacy: the truncated objective must agree with the
        // exact norms of the realized maps.
        double trunc_energy = 0.0;
        {
            const auto h_m = maps.l_y_p21_s.impulse_response(static_cast<std::size_t>(horizon));
            for (double v : h_m) trunc_energy += v * v;
        }
        const double rel = std::abs(trunc_energy - m_norm) / std::max(m_norm, 1e-300);
        const bool gamma_ok =
            std::abs(report.achieved_gamma - config.gamma_target) <=
            0.02 * config.gamma_target;
        if ((rel <= std::max(1e-6, config.bisection_tolerance) || m_norm == 0.0) && gamma_ok &&
            report.internally_stable)
            return report;

        if (iterations >= config.max_iterations)
            throw SynthesisFailure("no convergence within max_iterations", report);
        horizon *= 2;
    }
}

StabilityReport verify_internal_stability(const PlantModel& plant, const LoopFilters& filters) {
    const ClosedLoopMaps maps = closed_loop_maps(plant, filters);
    const TransferFunction one = TransferFunction::constant(1.0);

    StabilityReport out;
    auto check = [&out](const char* name, const TransferFunction& tf) {
        if (!is_stable(tf.simplified())) out.unstable_paths.emplace_back(name);
    };
    const TransferFunction fs = (filters.f * maps.s).simplified();
    const TransferFunction d_to_w = maps.l_y_p21_s;  // == S l_y p21
    check("q->w", maps.s);
    check("q->v", (maps.s - one).simplified());
    check("q->u", fs);
    check("q->y", (plant.p22 * fs).simplified());
    check("q->e", maps.p12_f_s);
    check("d->w", d_to_w);
    check("d->v", d_to_w);
    check("d->u", (filters.f * d_to_w).simplified());
    check("d->y", (plant.p21 + plant.p22 * filters.f * d_to_w).simplified());
    check("d->e", maps.nominal);
    out.stable = out.unstable_paths.empty();
    return out;
}

void to_json(nlohmann::json& j, const SynthesisReport& r) {
    j = nlohmann::json{{"filters", r.filters},
                       {"achieved_gamma", r.achieved_gamma},
                       {"achieved_sigma_e_sq", r.achieved_sigma_e_sq},
                       {"sigma_q_sq", r.sigma_q_sq},
                       {"internally_stable", r.internally_stable},
                       {"iterations", r.iterations}};
}

}  // namespace stabcode
