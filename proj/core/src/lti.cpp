#include "stabcode/lti.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace stabcode {

bool is_stable(const TransferFunction& tf, double margin) {
    if (margin <= 0.0 || margin >= 1.0) throw std::invalid_argument("stability margin must be in (0,1)");
    for (const auto& p : tf.poles())
        if (std::abs(p) > 1.0 - margin) return false;
    return true;
}

namespace {

double max_pole_radius(const TransferFunction& tf) {
    double r = 0.0;
    for (const auto& p : tf.poles()) r = std::max(r, std::abs(p));
    return r;
}

// Controllable-canonical realization of a causal rational function in z^-1,
// numerator and denominator padded to a common order.
struct StateSpace {
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    Eigen::RowVectorXd c;
    double d = 0.0;
};

StateSpace realize(const TransferFunction& tf) {
    std::vector<double> num = tf.num();
    std::vector<double> den = tf.den();
    const std::size_t order = std::max(num.size(), den.size()) - 1;
    num.resize(order + 1, 0.0);
    den.resize(order + 1, 0.0);
    StateSpace ss;
    const auto n = static_cast<long>(order);
    ss.a = Eigen::MatrixXd::Zero(n, n);
    ss.b = Eigen::VectorXd::Zero(n);
    ss.c = Eigen::RowVectorXd::Zero(n);
    ss.d = num[0];
    if (order == 0) return ss;
    for (long i = 0; i < n; ++i) ss.a(0, i) = -den[static_cast<std::size_t>(i) + 1];
    for (long i = 1; i < n; ++i) ss.a(i, i - 1) = 1.0;
    ss.b(0) = 1.0;
    for (long i = 0; i < n; ++i)
        ss.c(i) = num[static_cast<std::size_t>(i) + 1] - num[0] * den[static_cast<std::size_t>(i) + 1];
    return ss;
}

// Solves P = A P A^T + B B^T by Smith doubling; valid for spectral radius < 1.
Eigen::MatrixXd discrete_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q) {
    Eigen::MatrixXd p = q;
    Eigen::MatrixXd m = a;
    for (int iter = 0; iter < 200; ++iter) {
        const Eigen::MatrixXd update = m * p * m.transpose();
        p += update;
        if (update.norm() <= 1e-16 * std::max(1.0, p.norm())) break;
        m = m * m;
        if (m.norm() < 1e-160) break;
    }
    return p;
}

}  // namespace

double h2_norm_sq_truncated(const TransferFunction& tf) {
    const TransferFunction m = tf.simplified();
    if (m.is_zero()) return 0.0;
    const double r = max_pole_radius(m);
    if (r > 1.0 - kStabilityMargin)
        throw std::domain_error("h2 norm undefined for unstable transfer function");
    // Geometric tail estimate from the largest pole radius; FIR responses
    // terminate once the horizon passes the numerator length.
    const std::size_t block = 256;
    std::size_t horizon = std::max<std::size_t>(block, m.num().size() + m.den().size());
    double total = 0.0;
    std::vector<double> h;
    std::size_t consumed = 0;
    const double r2 = r * r;
    for (int rounds = 0; rounds < 64; ++rounds) {
        h = m.impulse_response(horizon);
        total = 0.0;
        for (double v : h) total += v * v;
        if (r == 0.0 && horizon >= m.num().size()) return total;
        double tail_block = 0.0;
        for (std::size_t i = horizon - std::min(block, horizon); i < horizon; ++i)
            tail_block += h[i] * h[i];
        const double tail_bound = r2 < 1.0 ? tail_block * r2 / (1.0 - r2) : 1e300;
        if (tail_bound <= 1e-12 * std::max(total, 1e-300)) return total;
        consumed = horizon;
        horizon *= 2;
        if (horizon > (1u << 24))
            throw std::runtime_error("h2 truncation horizon exhausted (pole too close to the unit circle)");
    }
    (void)consumed;
    return total;
}

double h2_norm_sq(const TransferFunction& tf) {
    const TransferFunction m = tf.simplified();
    if (m.is_zero()) return 0.0;
    if (!is_stable(m)) throw std::domain_error("h2 norm undefined for unstable transfer function");
    const StateSpace ss = realize(m);
    double lyap;
    if (ss.a.rows() == 0) {
        lyap = ss.d * ss.d;
    } else {
        const Eigen::MatrixXd p = discrete_lyapunov(ss.a, ss.b * ss.b.transpose());
        lyap = ss.d * ss.d + (ss.c * p * ss.c.transpose())(0, 0);
    }
    const double trunc = h2_norm_sq_truncated(m);
    const double scale = std::max({std::abs(lyap), std::abs(trunc), 1e-300});
    if (std::abs(lyap - trunc) > 1e-8 * scale)
        throw std::runtime_error("h2 norm cross-check failed: Lyapunov and truncated-sum routes disagree");
    return lyap;
}

ClosedLoopMaps closed_loop_maps(const PlantModel& plant, const LoopFilters& filters) {
    const TransferFunction one = TransferFunction::constant(1.0);
    const TransferFunction zinv = TransferFunction::delay();
    const TransferFunction loop = one - filters.l_w * zinv - plant.p22 * filters.f * filters.l_y;
    // Well-posedness: the algebraic (delay-free) part of the loop must be
    // invertible, i.e. the constant term of the loop function is nonzero.
    const double c0 = loop.feedthrough();
    if (std::abs(c0) < 1e-12)
        throw std::domain_error("ill-posed loop: zero constant term in 1 - l_w z^-1 - p22 f l_y");

    ClosedLoopMaps maps;
    maps.s = (one / loop).simplified();
    maps.k = (filters.f * filters.l_y / (one - filters.l_w * zinv)).simplified();
    maps.l_y_p21_s = (filters.l_y * plant.p21 * maps.s).simplified();
    maps.p12_f_s = (plant.p12 * filters.f * maps.s).simplified();
    maps.nominal = (plant.p11 + plant.p12 * filters.f * maps.s * filters.l_y * plant.p21).simplified();
    maps.internally_stable = is_stable(maps.s) && is_stable(maps.l_y_p21_s) &&
                             is_stable(maps.p12_f_s) && is_stable(maps.nominal);
    return maps;
}

double min_snr_for_stability(const PlantModel& plant) {
    double prod = 1.0;
    for (const auto& p : plant.p22.simplified().poles()) {
        const double r = std::abs(p);
        if (std::abs(r - 1.0) <= 1e-9)
            throw std::domain_error("marginally stable, infimum not attained");
        if (r > 1.0) prod *= r * r;
    }
    return prod - 1.0;
}

void to_json(nlohmann::json& j, const PlantModel& p) {
    j = nlohmann::json{{"p11", p.p11}, {"p12", p.p12}, {"p21", p.p21}, {"p22", p.p22}};
}

void from_json(const nlohmann::json& j, PlantModel& p) {
    if (j.contains("g")) {
        p = PlantModel::from_siso(j.at("g").get<TransferFunction>());
        return;
    }
    j.at("p11").get_to(p.p11);
    j.at("p12").get_to(p.p12);
    j.at("p21").get_to(p.p21);
    j.at("p22").get_to(p.p22);
}

void to_json(nlohmann::json& j, const LoopFilters& f) {
    j = nlohmann::json{{"f", f.f}, {"l_w", f.l_w}, {"l_y", f.l_y}};
}

void from_json(const nlohmann::json& j, LoopFilters& f) {
    j.at("f").get_to(f.f);
    j.at("l_w").get_to(f.l_w);
    j.at("l_y").get_to(f.l_y);
}

}  // namespace stabcode
