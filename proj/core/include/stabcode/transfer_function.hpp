#pragma once

#include <complex>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace stabcode {

/// Rational discrete-time transfer function
///
///            num[0] + num[1] z^-1 + ... + num[m] z^-m
///   H(z) =  ------------------------------------------
///            den[0] + den[1] z^-1 + ... + den[n] z^-n
///
/// Coefficients are stored in ascending powers of z^-1. The denominator is
/// normalized so that den[0] == 1, which keeps every function causal and
/// makes well-posedness of feedback loops a check on constant terms.
class TransferFunction {
public:
    /// Zero transfer function.
    TransferFunction();
    TransferFunction(std::vector<double> num, std::vector<double> den);

    static TransferFunction constant(double c);
    /// One-sample delay z^-1.
    static TransferFunction delay();
    /// Builds num_z(z)/den_z(z) from z-domain root lists, e.g.
    /// from_zpk({},{2.0,0.5789},0.165) is 0.165/((z-2)(z-0.5789)).
    static TransferFunction from_zpk(const std::vector<std::complex<double>>& zeros,
                                     const std::vector<std::complex<double>>& poles,
                                     double gain);

    const std::vector<double>& num() const { return num_; }
    const std::vector<double>& den() const { return den_; }

    bool is_zero() const;
    bool is_constant() const;
    double constant_value() const;
    /// Direct feedthrough H(z = infinity) = num[0]/den[0].
    double feedthrough() const { return num_.empty() ? 0.0 : num_.front(); }
    std::complex<double> eval(std::complex<double> z_inv_value) const;

    /// Poles in the z-plane of the minimal (pole/zero cancelled) form,
    /// multiplicity preserved. Delay-only dynamics contribute no poles.
    std::vector<std::complex<double>> poles() const;
    std::vector<std::complex<double>> zeros() const;

    /// Cancels matching pole/zero pairs within `tol` (relative in root space).
    TransferFunction simplified(double tol = kCancelTol) const;

    /// First `n` taps of the impulse response.
    std::vector<double> impulse_response(std::size_t n) const;

    TransferFunction operator+(const TransferFunction& rhs) const;
    TransferFunction operator-(const TransferFunction& rhs) const;
    TransferFunction operator*(const TransferFunction& rhs) const;
    TransferFunction operator/(const TransferFunction& rhs) const;
    TransferFunction operator-() const;
    TransferFunction operator*(double s) const;
    friend TransferFunction operator*(double s, const TransferFunction& tf) { return tf * s; }
    friend TransferFunction operator-(double s, const TransferFunction& tf)
    { return constant(s) - tf; }

    bool approx_equal(const TransferFunction& rhs, double tol = 1e-9) const;

    std::string to_string() const;

    static constexpr double kCancelTol = 1e-9;

private:
    std::vector<double> num_;
    std::vector<double> den_;

    void normalize();
};

void to_json(nlohmann::json& j, const TransferFunction& tf);
void from_json(const nlohmann::json& j, TransferFunction& tf);

namespace poly {

/// Polynomial helpers on coefficient vectors in ascending powers of z^-1.
std::vector<double> add(const std::vector<double>& a, const std::vector<double>& b);
std::vector<double> sub(const std::vector<double>& a, const std::vector<double>& b);
std::vector<double> mul(const std::vector<double>& a, const std::vector<double>& b);
std::vector<double> scale(const std::vector<double>& a, double s);
std::vector<double> trim(std::vector<double> a, double rel_tol = 1e-12);
bool is_zero(const std::vector<double>& a);
std::size_t degree(const std::vector<double>& a);

/// Roots of a0 + a1 w + ... + an w^n in the w = z^-1 variable
/// (companion-matrix eigenvalues).
std::vector<std::complex<double>> roots(const std::vector<double>& a);

/// Rebuilds real coefficients from a conjugate-closed root multiset,
/// `leading` multiplying the highest power.
std::vector<double> from_roots(const std::vector<std::complex<double>>& rts, double leading);

}  // namespace poly

}  // namespace stabcode
