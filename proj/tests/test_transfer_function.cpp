#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "mfcd/transfer_function.hpp"

using namespace mfcd;
using std::complex;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Independent root oracle: Durand-Kerner iteration on the descending-coefficient
// polynomial. Deliberately shares nothing with the library implementation.
std::vector<complex<double>> durand_kerner(std::vector<double> desc) {
    while (desc.size() > 1 && desc.front() == 0.0)
        desc.erase(desc.begin());
    const std::size_t m = desc.size() - 1;
    std::vector<complex<double>> r(m);
    complex<double> seed{0.4, 0.9};
    complex<double> acc{1.0, 0.0};
    for (std::size_t i = 0; i < m; ++i) {
        r[i] = acc;
        acc *= seed;
    }
    auto eval = [&](complex<double> x) {
        complex<double> v{0.0, 0.0};
        for (double c : desc)
            v = v * x + c;
        return v / desc[0];
    };
    for (int it = 0; it < 2000; ++it) {
        double moved = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            complex<double> denom{1.0, 0.0};
            for (std::size_t j = 0; j < m; ++j)
                if (j != i)
                    denom *= r[i] - r[j];
            const complex<double> step = eval(r[i]) / denom;
            r[i] -= step;
            moved = std::max(moved, std::abs(step));
        }
        if (moved < 1e-14)
            break;
    }
    return r;
}

double match_roots(std::vector<complex<double>> a, std::vector<complex<double>> b) {
    REQUIRE(a.size() == b.size());
    double worst = 0.0;
    for (const auto& ra : a) {
        double best = 1e300;
        std::size_t best_j = 0;
        for (std::size_t j = 0; j < b.size(); ++j) {
            const double d = std::abs(ra - b[j]);
            if (d < best) {
                best = d;
                best_j = j;
            }
        }
        worst = std::max(worst, best);
        b.erase(b.begin() + static_cast<std::ptrdiff_t>(best_j));
    }
    return worst;
}

DiscreteTransferFunction vehicle() {
    return {{0.0, 0.01262, -0.01236}, {1.0, -2.957, 2.915, -0.9581}, 0.05};
}

} // namespace

TEST_CASE("eval_freq identity and unit delay") {
    const auto one = DiscreteTransferFunction::constant(1.0, 0.1);
    for (double w : {0.0, 1.0, 10.0, kPi / 0.1}) {
        const auto v = eval_freq(one, w);
        CHECK(v.real() == doctest::Approx(1.0));
        CHECK(v.imag() == doctest::Approx(0.0));
    }
    const auto del = DiscreteTransferFunction::delay(1.0);
    const auto v = eval_freq(del, kPi);
    CHECK(v.real() == doctest::Approx(-1.0));
    CHECK(std::abs(v.imag()) < 1e-12);
}

TEST_CASE("eval_freq of the vehicle model at z = 1") {
    const auto v = eval_freq(vehicle(), 0.0);
    CHECK(v.real() == doctest::Approx(-2.6).epsilon(1e-3));
    CHECK(v.imag() == doctest::Approx(0.0));
}

TEST_CASE("eval_freq real-coefficient conjugate symmetry") {
    std::mt19937_64 rng(7);
    auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> num{2.0 * u() - 1.0, 2.0 * u() - 1.0, 2.0 * u() - 1.0};
        std::vector<double> den{1.0, u() - 0.5, 0.6 * u() - 0.3};
        const DiscreteTransferFunction tf(num, den, 0.05);
        for (int k = 0; k < 10; ++k) {
            const double w = 20.0 * u();
            const auto a = eval_freq(tf, w);
            const auto b = std::conj(eval_freq(tf, -w));
            CHECK(std::abs(a - b) < 1e-13 * std::max(1.0, std::abs(a)));
        }
    }
}

TEST_CASE("eval_freq reports a pole on the unit circle") {
    const DiscreteTransferFunction integ({1.0}, {1.0, -1.0}, 1.0);
    CHECK_THROWS_AS(eval_freq(integ, 0.0), NumericalError);
}

TEST_CASE("poles of first-order factors") {
    const DiscreteTransferFunction a({1.0}, {1.0, -0.5}, 1.0);
    auto pa = poles(a);
    REQUIRE(pa.size() == 1);
    CHECK(std::abs(pa[0] - complex<double>{0.5, 0.0}) < 1e-12);

    const DiscreteTransferFunction b({1.0}, {1.0, -0.75, 0.125}, 1.0);
    auto pb = poles(b);
    REQUIRE(pb.size() == 2);
    std::vector<complex<double>> expect{{0.5, 0.0}, {0.25, 0.0}};
    CHECK(match_roots(expect, pb) < 1e-10);
}

TEST_CASE("vehicle poles match the Durand-Kerner oracle") {
    const auto p = poles(vehicle());
    REQUIRE(p.size() == 3);
    const auto q = durand_kerner({1.0, -2.957, 2.915, -0.9581});
    CHECK(match_roots(q, p) < 1e-8);
}

TEST_CASE("poles recover random factor sets of degree <= 6") {
    std::mt19937_64 rng(11);
    auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (int trial = 0; trial < 40; ++trial) {
        const int deg = 1 + static_cast<int>(u() * 5.99);
        std::vector<complex<double>> roots;
        std::vector<double> den{1.0};
        int i = 0;
        while (i < deg) {
            const double mag = 0.1 + 1.9 * u(); // stable and unstable factors
            if (deg - i >= 2 && u() < 0.5) {
                const double th = kPi * u();
                const complex<double> r = std::polar(mag, th);
                roots.push_back(r);
                roots.push_back(std::conj(r));
                // (1 - r z^-1)(1 - conj(r) z^-1)
                den = poly::mul(den, {1.0, -2.0 * r.real(), std::norm(r)});
                i += 2;
            } else {
                const double r = (u() < 0.5 ? -1.0 : 1.0) * mag;
                roots.push_back({r, 0.0});
                den = poly::mul(den, {1.0, -r});
                i += 1;
            }
        }
        const DiscreteTransferFunction tf({1.0}, den, 1.0);
        CHECK(match_roots(roots, poles(tf)) < 1e-8);
    }
}

TEST_CASE("is_stable classification") {
    CHECK(is_stable({{1.0}, {1.0, -0.5}, 1.0}));
    CHECK_FALSE(is_stable({{1.0}, {1.0, -2.0}, 1.0}));
    // vehicle model agrees with the oracle's classification
    const auto q = durand_kerner({1.0, -2.957, 2.915, -0.9581});
    bool oracle_stable = true;
    for (const auto& r : q)
        oracle_stable = oracle_stable && std::abs(r) < 1.0;
    CHECK(is_stable(vehicle()) == oracle_stable);
    CHECK_FALSE(oracle_stable); // the identified model carries a pole outside the unit circle
}

TEST_CASE("series identity and constant feedback") {
    const auto g = vehicle();
    const auto one = DiscreteTransferFunction::constant(1.0, g.ts);
    const auto s = series(one, g);
    for (double w : {0.1, 1.0, 10.0})
        CHECK(std::abs(eval_freq(s, w) - eval_freq(g, w)) < 1e-14);

    const auto k = DiscreteTransferFunction::constant(3.0, 1.0);
    const auto fb = feedback(k, DiscreteTransferFunction::constant(1.0, 1.0));
    CHECK(eval_freq(fb, 0.3).real() == doctest::Approx(0.75));
}

TEST_CASE("compositions normalize the leading denominator coefficient") {
    const DiscreteTransferFunction a({2.0, 1.0}, {4.0, 1.0}, 1.0);
    const DiscreteTransferFunction b({1.0, -0.5}, {2.0, 0.5}, 1.0);
    for (const auto& tf : {series(a, b), add(a, b), feedback(a, b), divide(a, b)})
        CHECK(tf.den[0] == 1.0);
}

TEST_CASE("feedback matches pointwise closure at random frequencies") {
    std::mt19937_64 rng(23);
    auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    const DiscreteTransferFunction f({0.0, 0.4, 0.2}, {1.0, -1.1, 0.4}, 0.01);
    const DiscreteTransferFunction b({1.0, -0.3}, {1.0, 0.2}, 0.01);
    const auto closed = feedback(f, b);
    for (int k = 0; k < 100; ++k) {
        const double w = u() * kPi / 0.01;
        const auto ef = eval_freq(f, w);
        const auto eb = eval_freq(b, w);
        const auto expect = ef / (1.0 + ef * eb);
        const auto got = eval_freq(closed, w);
        CHECK(std::abs(got - expect) < 1e-10 * std::max(1.0, std::abs(expect)));
    }
}

TEST_CASE("sample time mismatch is rejected") {
    const auto a = DiscreteTransferFunction::constant(1.0, 0.1);
    const auto b = DiscreteTransferFunction::constant(1.0, 0.2);
    CHECK_THROWS_AS(series(a, b), SampleTimeMismatch);
    CHECK_THROWS_AS(add(a, b), SampleTimeMismatch);
    CHECK_THROWS_AS(feedback(a, b), SampleTimeMismatch);
}

TEST_CASE("minreal cancels a shared factor only when asked") {
    // (1 - 0.5 z^-1)(1 - 0.3 z^-1) / ((1 - 0.5 z^-1)(1 - 0.7 z^-1))
    const auto num = poly::mul({1.0, -0.5}, {1.0, -0.3});
    const auto den = poly::mul({1.0, -0.5}, {1.0, -0.7});
    const DiscreteTransferFunction tf(num, den, 1.0);
    CHECK(tf.den.size() == 3); // no silent cancellation
    const auto red = minreal(tf);
    REQUIRE(red.num.size() == 2);
    REQUIRE(red.den.size() == 2);
    CHECK(red.num[1] == doctest::Approx(-0.3).epsilon(1e-9));
    CHECK(red.den[1] == doctest::Approx(-0.7).epsilon(1e-9));
    for (double w : {0.2, 1.0, 2.5})
        CHECK(std::abs(eval_freq(red, w) - eval_freq(tf, w)) < 1e-9);
}

TEST_CASE("zero-order hold matches the sampled-integrator closed form") {
    // H(s) = 1/(s(s+1)): G(z) = ((T-1+e^-T) z^-1 + (1-e^-T-T e^-T) z^-2)
    //                         / (1 - (1+e^-T) z^-1 + e^-T z^-2)
    const double T = 0.1;
    const double eT = std::exp(-T);
    const auto g = discretize({1.0, 1.0, 0.0, 1.0}, T);
    REQUIRE(g.num.size() == 3);
    CHECK(g.num[0] == 0.0);
    CHECK(g.num[1] == doctest::Approx(T - 1.0 + eT).epsilon(1e-10));
    CHECK(g.num[2] == doctest::Approx(1.0 - eT - T * eT).epsilon(1e-10));
    CHECK(g.den[1] == doctest::Approx(-(1.0 + eT)).epsilon(1e-12));
    CHECK(g.den[2] == doctest::Approx(eT).epsilon(1e-12));
}

TEST_CASE("discretization preserves DC gain") {
    std::mt19937_64 rng(31);
    auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (int trial = 0; trial < 25; ++trial) {
        ContinuousSecondOrder sys;
        sys.a2 = 0.1 + u();
        sys.a1 = 2.0 * u() - 1.0;
        sys.a0 = (u() < 0.5 ? -1.0 : 1.0) * (0.2 + u());
        sys.k = 2.0 * u() - 1.0;
        const double ts = 0.002 + 0.02 * u();
        for (auto method : {DiscretizationMethod::zoh, DiscretizationMethod::tustin}) {
            const auto g = discretize(sys, ts, method);
            const double dc = eval_freq(g, 0.0).real();
            CHECK(std::abs(dc - sys.k / sys.a0) < 1e-9 * std::abs(sys.k / sys.a0) + 1e-12);
        }
    }
}

TEST_CASE("degenerate continuous plant is rejected") {
    CHECK_THROWS_AS(discretize({0.0, 1.0, 1.0, 1.0}, 0.1), Error);
    CHECK_THROWS_AS(discretize({1.0, 1.0, 1.0, 1.0}, 0.0), Error);
}

TEST_CASE("JSON round trip is exact") {
    const auto g = vehicle();
    const auto back = tf_from_json(to_json(g));
    CHECK(back == g);
}

TEST_CASE("frequency grid validation and endpoints") {
    CHECK_THROWS_AS(FrequencyGrid(0.0, 1.0, 10, GridSpacing::linear), Error);
    CHECK_THROWS_AS(FrequencyGrid(2.0, 1.0, 10, GridSpacing::linear), Error);
    CHECK_THROWS_AS(FrequencyGrid(0.1, 1.0, 1, GridSpacing::linear), Error);

    const auto grid = FrequencyGrid::log_default(0.01);
    const auto ws = grid.omegas();
    REQUIRE(static_cast<int>(ws.size()) == grid.points);
    CHECK(ws.front() == doctest::Approx(2.0 * kPi / (1e4 * 0.01)));
    CHECK(ws.back() == kPi / 0.01);
    CHECK(std::is_sorted(ws.begin(), ws.end()));
}

TEST_CASE("transfer function invariants are enforced") {
    CHECK_THROWS_AS(DiscreteTransferFunction({1.0}, {}, 1.0), Error);
    CHECK_THROWS_AS(DiscreteTransferFunction({1.0}, {0.0, 1.0}, 1.0), Error);
    CHECK_THROWS_AS(DiscreteTransferFunction({1.0}, {1.0}, 0.0), Error);
    CHECK_THROWS_AS(DiscreteTransferFunction({1.0}, {1.0}, -1.0), Error);
}
