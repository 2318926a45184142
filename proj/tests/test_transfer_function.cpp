#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include <nlohmann/json.hpp>

#include "stabcode/transfer_function.hpp"

using namespace stabcode;

namespace {

// 0.165 / ((z-2)(z-0.5789)), the second-order benchmark plant used
// throughout the suite.
TransferFunction bench_plant_tf() {
    return TransferFunction::from_zpk({}, {2.0, 0.5789}, 0.165);
}

bool contains_root(const std::vector<std::complex<double>>& roots, std::complex<double> r,
                   double tol = 1e-6) {
    for (const auto& x : roots)
        if (std::abs(x - r) <= tol) return true;
    return false;
}

}  // namespace

TEST_SUITE_BEGIN("transfer_function");

TEST_CASE("zpk construction lands on the expected coefficients") {
    const TransferFunction g = bench_plant_tf();
    REQUIRE(g.num().size() == 3);
    CHECK(g.num()[0] == doctest::Approx(0.0));
    CHECK(g.num()[1] == doctest::Approx(0.0));
    CHECK(g.num()[2] == doctest::Approx(0.165));
    REQUIRE(g.den().size() == 3);
    CHECK(g.den()[0] == doctest::Approx(1.0));
    CHECK(g.den()[1] == doctest::Approx(-2.5789));
    CHECK(g.den()[2] == doctest::Approx(2.0 * 0.5789));
}

TEST_CASE("poles of the benchmark plant") {
    const auto p = bench_plant_tf().poles();
    REQUIRE(p.size() == 2);
    CHECK(contains_root(p, {2.0, 0.0}, 1e-9));
    CHECK(contains_root(p, {0.5789, 0.0}, 1e-9));
}

TEST_CASE("constant gain has no poles") {
    CHECK(TransferFunction::constant(5.0).poles().empty());
}

TEST_CASE("repeated pole is reported with multiplicity") {
    const TransferFunction tf = TransferFunction::from_zpk({}, {0.5, 0.5}, 1.0);
    const auto p = tf.poles();
    REQUIRE(p.size() == 2);
    CHECK(contains_root(p, {0.5, 0.0}, 1e-6));
    CHECK(std::abs(p[0] - p[1]) < 2e-6);
}

TEST_CASE("degenerate denominator is rejected") {
    CHECK_THROWS_AS(TransferFunction({1.0}, {0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(TransferFunction({1.0}, {0.0, 1.0}), std::invalid_argument);  // non-causal
    CHECK_THROWS_AS(TransferFunction({1.0, std::nan("")}, {1.0}), std::invalid_argument);
}

TEST_CASE("pole/zero cancellation in simplified form") {
    // (1 - 0.3 z^-1) appears in both numerator and denominator.
    const std::vector<double> common{1.0, -0.3};
    const TransferFunction tf(poly::mul({1.0, -0.1}, common), poly::mul({1.0, -0.5}, common));
    const TransferFunction s = tf.simplified();
    CHECK(s.num().size() == 2);
    CHECK(s.den().size() == 2);
    CHECK(s.approx_equal(TransferFunction({1.0, -0.1}, {1.0, -0.5}), 1e-9));
}

TEST_CASE("rational arithmetic against pointwise evaluation") {
    const TransferFunction a({0.3, 1.2}, {1.0, -0.4});
    const TransferFunction b({1.0, 0.0, -0.2}, {1.0, 0.1, 0.05});
    const std::complex<double> w{0.37, 0.21};
    auto evc = [&](const TransferFunction& tf) { return tf.eval(w); };
    CHECK(std::abs(evc(a + b) - (evc(a) + evc(b))) < 1e-12);
    CHECK(std::abs(evc(a - b) - (evc(a) - evc(b))) < 1e-12);
    CHECK(std::abs(evc(a * b) - evc(a) * evc(b)) < 1e-12);
    CHECK(std::abs(evc(a / b) - evc(a) / evc(b)) < 1e-12);
    CHECK(std::abs(evc(a * 2.5) - 2.5 * evc(a)) < 1e-12);
}

TEST_CASE("zero operand shortcuts keep coefficients exact") {
    const TransferFunction z;
    const TransferFunction a({1.0, 0.5}, {1.0, -0.2});
    CHECK((a + z).approx_equal(a, 0.0));
    CHECK((a * z).is_zero());
    const TransferFunction one = TransferFunction::constant(1.0);
    const TransferFunction s = one / (one - z - z);
    CHECK(s.num() == std::vector<double>{1.0});
    CHECK(s.den() == std::vector<double>{1.0});
}

TEST_CASE("impulse response matches difference equation") {
    const TransferFunction tf({0.0, 1.0}, {1.0, -0.5});
    const auto h = tf.impulse_response(6);
    for (std::size_t n = 1; n < h.size(); ++n)
        CHECK(h[n] == doctest::Approx(std::pow(0.5, static_cast<double>(n - 1))));
    CHECK(h[0] == doctest::Approx(0.0));
}

TEST_CASE("json round trip") {
    const TransferFunction g = bench_plant_tf();
    nlohmann::json j = g;
    const auto back = j.get<TransferFunction>();
    CHECK(back.approx_equal(g, 1e-15));
    CHECK(j.at("num").size() == 3);
    CHECK(j.at("den").size() == 3);
}

TEST_CASE("delay utility") {
    const TransferFunction d = TransferFunction::delay();
    CHECK(d.num() == std::vector<double>{0.0, 1.0});
    CHECK(d.den() == std::vector<double>{1.0});
}

TEST_CASE("randomized simplify keeps the function value") {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> unif(-0.9, 0.9);
    for (int trial = 0; trial < 50; ++trial) {
        const double shared = unif(rng);
        const TransferFunction base({unif(rng), unif(rng)}, {1.0, unif(rng)});
        const std::vector<double> common{1.0, -shared};
        const TransferFunction padded(poly::mul(base.num(), common),
                                      poly::mul(base.den(), common));
        const TransferFunction s = padded.simplified();
        const std::complex<double> w{0.19, -0.23};
        CHECK(std::abs(s.eval(w) - base.eval(w)) < 1e-8 * (1.0 + std::abs(base.eval(w))));
    }
}

TEST_SUITE_END();
