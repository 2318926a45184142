#include "stabcode/transfer_function.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

namespace stabcode {

namespace poly {

std::vector<double> add(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(std::max(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
    return out;
}

std::vector<double> sub(const std::vector<double>& a, const std::vector<double>& b) {
    return add(a, scale(b, -1.0));
}

std::vector<double> mul(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) return {};
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

std::vector<double> scale(const std::vector<double>& a, double s) {
    std::vector<double> out(a);
    for (double& c : out) c *= s;
    return out;
}

std::vector<double> trim(std::vector<double> a, double rel_tol) {
    double mx = 0.0;
    for (double c : a) mx = std::max(mx, std::abs(c));
    const double cut = std::max(mx * rel_tol, 1e-300);
    while (a.size() > 1 && std::abs(a.back()) <= cut) a.pop_back();
    if (a.size() == 1 && std::abs(a[0]) <= cut) a[0] = 0.0;
    return a;
}

bool is_zero(const std::vector<double>& a) {
    for (double c : a)
        if (c != 0.0) return false;
    return true;
}

std::size_t degree(const std::vector<double>& a) {
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != 0.0) d = i;
    return d;
}

std::vector<std::complex<double>> roots(const std::vector<double>& a_in) {
    std::vector<double> a = trim(a_in);
    if (a.size() <= 1) return {};
    const std::size_t n = a.size() - 1;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i) companion(0, i) = -a[n - 1 - i] / a[n];
    for (std::size_t i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion, /*computeEigenvectors=*/false);
    std::vector<std::complex<double>> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = es.eigenvalues()(static_cast<long>(i));
    return out;
}

std::vector<double> from_roots(const std::vector<std::complex<double>>& rts, double leading) {
    std::vector<std::complex<double>> c = {1.0};
    for (const auto& r : rts) {
        std::vector<std::complex<double>> next(c.size() + 1, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i + 1] += c[i];
            next[i] -= r * c[i];
        }
        c = std::move(next);
    }
    std::vector<double> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = leading * c[i].real();
    return out;
}

}  // namespace poly

namespace {

void check_finite(const std::vector<double>& c, const char* what) {
    for (double v : c)
        if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " has non-finite coefficient");
}

// Greedily removes root pairs closer than tol (relative in root magnitude).
void cancel_common(std::vector<std::complex<double>>& a, std::vector<std::complex<double>>& b,
                   double tol) {
    for (std::size_t i = 0; i < a.size();) {
        bool cancelled = false;
        for (std::size_t j = 0; j < b.size(); ++j) {
            const double d = std::abs(a[i] - b[j]);
            if (d <= tol * std::max(1.0, std::abs(b[j]))) {
                a.erase(a.begin() + static_cast<long>(i));
                b.erase(b.begin() + static_cast<long>(j));
                cancelled = true;
                break;
            }
        }
        if (!cancelled) ++i;
    }
}

}  // namespace

TransferFunction::TransferFunction() : num_{0.0}, den_{1.0} {}

TransferFunction::TransferFunction(std::vector<double> num, std::vector<double> den)
    : num_(std::move(num)), den_(std::move(den)) {
    normalize();
}

void TransferFunction::normalize() {
    check_finite(num_, "numerator");
    check_finite(den_, "denominator");
    if (num_.empty()) num_ = {0.0};
    den_ = poly::trim(den_);
    if (den_.empty() || poly::is_zero(den_)) throw std::invalid_argument("degenerate (all-zero) denominator");
    double dmax = 0.0;
    for (double c : den_) dmax = std::max(dmax, std::abs(c));
    if (std::abs(den_[0]) <= 1e-12 * dmax)
        throw std::invalid_argument("denominator constant term is zero (non-causal or ill-posed)");
    const double d0 = den_[0];
    for (double& c : num_) c /= d0;
    for (double& c : den_) c /= d0;
    den_[0] = 1.0;
    num_ = poly::trim(num_);
    if (poly::is_zero(num_)) {
        num_ = {0.0};
        den_ = {1.0};
    }
}

TransferFunction TransferFunction::constant(double c) { return TransferFunction({c}, {1.0}); }

TransferFunction TransferFunction::delay() { return TransferFunction({0.0, 1.0}, {1.0}); }

TransferFunction TransferFunction::from_zpk(const std::vector<std::complex<double>>& zeros,
                                            const std::vector<std::complex<double>>& poles,
                                            double gain) {
    // (z - r) in z-domain is z(1 - r z^-1); the z factors shift the numerator
    // by the pole/zero count difference to keep the function causal.
    std::vector<std::complex<double>> zinv_zeros, zinv_poles;
    double g = gain;
    std::size_t num_delay = poles.size() >= zeros.size() ? poles.size() - zeros.size() : 0;
    if (zeros.size() > poles.size())
        throw std::invalid_argument("from_zpk: more zeros than poles is non-causal");
    for (const auto& r : zeros) zinv_zeros.push_back(r);
    for (const auto& r : poles) zinv_poles.push_back(r);
    // In the w = z^-1 variable: (z - r) -> (1 - r w)/w, so each root keeps its
    // value as the coefficient in (1 - r w). Complex roots are consumed in
    // conjugate pairs to keep coefficients real.
    std::vector<double> num = {g};
    {
        std::vector<std::complex<double>> pending(zinv_zeros);
        while (!pending.empty()) {
            auto r = pending.front();
            pending.erase(pending.begin());
            if (std::abs(r.imag()) < 1e-14) {
                num = poly::mul(num, {1.0, -r.real()});
            } else {
                auto it = std::min_element(pending.begin(), pending.end(),
                                           [&](const auto& x, const auto& y) {
                                               return std::abs(x - std::conj(r)) < std::abs(y - std::conj(r));
                                           });
                if (it == pending.end()) throw std::invalid_argument("from_zpk: unpaired complex zero");
                pending.erase(it);
                num = poly::mul(num, {1.0, -2.0 * r.real(), std::norm(r)});
            }
        }
    }
    std::vector<double> den = {1.0};
    {
        std::vector<std::complex<double>> pending(zinv_poles);
        while (!pending.empty()) {
            auto r = pending.front();
            pending.erase(pending.begin());
            if (std::abs(r.imag()) < 1e-14) {
                den = poly::mul(den, {1.0, -r.real()});
            } else {
                auto it = std::min_element(pending.begin(), pending.end(),
                                           [&](const auto& x, const auto& y) {
                                               return std::abs(x - std::conj(r)) < std::abs(y - std::conj(r));
                                           });
                if (it == pending.end()) throw std::invalid_argument("from_zpk: unpaired complex pole");
                pending.erase(it);
                den = poly::mul(den, {1.0, -2.0 * r.real(), std::norm(r)});
            }
        }
    }
    std::vector<double> shifted(num_delay, 0.0);
    shifted.insert(shifted.end(), num.begin(), num.end());
    return TransferFunction(shifted, den);
}

bool TransferFunction::is_zero() const { return poly::is_zero(num_); }

bool TransferFunction::is_constant() const {
    return poly::degree(num_) == 0 && poly::degree(den_) == 0;
}

double TransferFunction::constant_value() const {
    if (!is_constant()) throw std::logic_error("transfer function is not constant");
    return num_[0];
}

std::complex<double> TransferFunction::eval(std::complex<double> w) const {
    std::complex<double> n = 0.0, d = 0.0, p = 1.0;
    for (std::size_t i = 0; i < std::max(num_.size(), den_.size()); ++i) {
        if (i < num_.size()) n += num_[i] * p;
        if (i < den_.size()) d += den_[i] * p;
        p *= w;
    }
    return n / d;
}

std::vector<std::complex<double>> TransferFunction::poles() const {
    const TransferFunction m = simplified();
    if (poly::is_zero(m.den_)) throw std::invalid_argument("degenerate (all-zero) denominator");
    auto w_roots = poly::roots(m.den_);
    std::vector<std::complex<double>> out;
    out.reserve(w_roots.size());
    for (const auto& w : w_roots) out.push_back(1.0 / w);
    return out;
}

std::vector<std::complex<double>> TransferFunction::zeros() const {
    const TransferFunction m = simplified();
    auto w_roots = poly::roots(m.num_);
    std::vector<std::complex<double>> out;
    for (const auto& w : w_roots) {
        if (std::abs(w) < 1e-300) continue;  // numerator delay factors, zeros at infinity
        out.push_back(1.0 / w);
    }
    return out;
}

TransferFunction TransferFunction::simplified(double tol) const {
    if (is_zero()) return TransferFunction();
    std::vector<double> n = poly::trim(num_);
    std::vector<double> d = poly::trim(den_);
    if (n.size() <= 1 && d.size() <= 1) return *this;
    // Leading coefficients of the highest powers survive cancellation.
    auto nr = poly::roots(n);
    auto dr = poly::roots(d);
    const std::size_t nr_before = nr.size(), dr_before = dr.size();
    cancel_common(nr, dr, tol);
    if (nr.size() == nr_before && dr.size() == dr_before) return *this;
    const double n_lead = n.back();
    const double d_lead = d.back();
    std::vector<double> n2 = poly::from_roots(nr, n_lead);
    std::vector<double> d2 = poly::from_roots(dr, d_lead);
    // from_roots builds ascending from the constant term of prod(w - r); the
    // leading coefficient convention already matches ascending z^-1 layout.
    return TransferFunction(n2, d2);
}

std::vector<double> TransferFunction::impulse_response(std::size_t n) const {
    std::vector<double> h(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        double acc = t < num_.size() ? num_[t] : 0.0;
        for (std::size_t i = 1; i < den_.size() && i <= t; ++i) acc -= den_[i] * h[t - i];
        h[t] = acc;
    }
    return h;
}

TransferFunction TransferFunction::operator+(const TransferFunction& rhs) const {
    if (is_zero()) return rhs;
    if (rhs.is_zero()) return *this;
    // Combine over the least common denominator: shared poles must not be
    // duplicated, or later pole/zero cancellation degrades to the
    // ill-conditioned repeated-root case.
    if (poly::degree(den_) > 0 && poly::degree(rhs.den_) > 0) {
        auto r1 = poly::roots(den_);
        auto r2 = poly::roots(rhs.den_);
        std::vector<std::complex<double>> only2 = r2;
        std::vector<std::complex<double>> r1_copy = r1;
        cancel_common(only2, r1_copy, kCancelTol);
        if (only2.size() != r2.size()) {
            const std::vector<std::complex<double>>& only1 = r1_copy;
            auto monic_c0 = [](const std::vector<std::complex<double>>& rts) {
                std::vector<double> p = poly::from_roots(rts, 1.0);
                const double c0 = p[0];
                for (double& v : p) v /= c0;
                return p;
            };
            const std::vector<double> cof2 = monic_c0(only2);
            const std::vector<double> cof1 = monic_c0(only1);
            return TransferFunction(
                poly::add(poly::mul(num_, cof2), poly::mul(rhs.num_, cof1)),
                poly::mul(den_, cof2));
        }
    }
    return TransferFunction(
        poly::add(poly::mul(num_, rhs.den_), poly::mul(rhs.num_, den_)),
        poly::mul(den_, rhs.den_));
}

TransferFunction TransferFunction::operator-(const TransferFunction& rhs) const {
    return *this + (-rhs);
}

TransferFunction TransferFunction::operator*(const TransferFunction& rhs) const {
    if (is_zero() || rhs.is_zero()) return TransferFunction();
    return TransferFunction(poly::mul(num_, rhs.num_), poly::mul(den_, rhs.den_));
}

TransferFunction TransferFunction::operator/(const TransferFunction& rhs) const {
    if (rhs.is_zero()) throw std::invalid_argument("division by zero transfer function");
    if (is_zero()) return TransferFunction();
    return TransferFunction(poly::mul(num_, rhs.den_), poly::mul(den_, rhs.num_));
}

TransferFunction TransferFunction::operator-() const {
    TransferFunction out(*this);
    for (double& c : out.num_) c = -c;
    return out;
}

TransferFunction TransferFunction::operator*(double s) const {
    if (s == 0.0) return TransferFunction();
    TransferFunction out(*this);
    for (double& c : out.num_) c *= s;
    return out;
}

bool TransferFunction::approx_equal(const TransferFunction& rhs, double tol) const {
    const TransferFunction a = simplified();
    const TransferFunction b = rhs.simplified();
    auto close = [tol](const std::vector<double>& x, const std::vector<double>& y) {
        if (x.size() != y.size()) return false;
        double mx = 0.0;
        for (double c : x) mx = std::max(mx, std::abs(c));
        for (std::size_t i = 0; i < x.size(); ++i)
            if (std::abs(x[i] - y[i]) > tol * std::max(1.0, mx)) return false;
        return true;
    };
    return close(a.num_, b.num_) && close(a.den_, b.den_);
}

std::string TransferFunction::to_string() const {
    std::ostringstream os;
    auto dump = [&os](const std::vector<double>& c) {
        os << "[";
        for (std::size_t i = 0; i < c.size(); ++i) os << (i ? ", " : "") << c[i];
        os << "]";
    };
    os << "num=";
    dump(num_);
    os << " den=";
    dump(den_);
    return os.str();
}

void to_json(nlohmann::json& j, const TransferFunction& tf) {
    j = nlohmann::json{{"num", tf.num()}, {"den", tf.den()}};
}

void from_json(const nlohmann::json& j, TransferFunction& tf) {
    tf = TransferFunction(j.at("num").get<std::vector<double>>(),
                          j.at("den").get<std::vector<double>>());
}

}  // namespace stabcode
