#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>

#include "mfcd/design.hpp"
#include "mfcd/plants.hpp"

using namespace mfcd;

TEST_CASE("pendulum continuous coefficients from the reference parameters") {
    const auto sys = pendulum_continuous(PendulumParams::reference());
    // I + m l^2 + m^2 l^2/(M+m) = 0.125 + 0.125 + 0.0625/0.6
    CHECK(sys.a2 == doctest::Approx(0.125 + 0.125 + 0.0625 / 0.6).epsilon(1e-12));
    CHECK(sys.a1 == doctest::Approx(2.0));
    CHECK(sys.a0 == doctest::Approx(-2.45).epsilon(1e-12));
    CHECK(sys.k == doctest::Approx(0.25 / 0.6).epsilon(1e-12));
}

TEST_CASE("pendulum without a bob degenerates to nothing") {
    PendulumParams p = PendulumParams::reference();
    p.pend_mass = 0.0;
    p.inertia = 0.0;
    const auto sys = pendulum_continuous(p);
    CHECK(sys.k == 0.0);
    CHECK(sys.a0 == 0.0);
}

TEST_CASE("upright pendulum has one positive continuous pole") {
    const auto sys = pendulum_continuous(PendulumParams::reference());
    CHECK(sys.a0 < 0.0);
    const double disc = sys.a1 * sys.a1 - 4.0 * sys.a2 * sys.a0;
    REQUIRE(disc > 0.0);
    const double r1 = (-sys.a1 + std::sqrt(disc)) / (2.0 * sys.a2);
    const double r2 = (-sys.a1 - std::sqrt(disc)) / (2.0 * sys.a2);
    CHECK(r1 > 0.0);
    CHECK(r2 < 0.0);
}

TEST_CASE("coefficients move smoothly with the pendulum mass") {
    const auto base = pendulum_continuous(PendulumParams::reference());
    PendulumParams p = PendulumParams::reference();
    p.pend_mass *= 1.01;
    p.inertia = p.pend_mass * p.length * p.length;
    const auto bumped = pendulum_continuous(p);
    CHECK(std::abs(bumped.a2 - base.a2) / base.a2 < 0.02);
}

TEST_CASE("discrete pendulum stays unstable and keeps its DC gain") {
    const auto g = pendulum_discrete(PendulumParams::reference(), 0.01);
    CHECK_FALSE(is_stable(g));
    const auto sys = pendulum_continuous(PendulumParams::reference());
    CHECK(eval_freq(g, 0.0).real() == doctest::Approx(sys.k / sys.a0).epsilon(1e-9));
}

TEST_CASE("vehicle transfer function carries the identified coefficients") {
    const auto g = vehicle_tf();
    CHECK(g.num == std::vector<double>{0.0, 0.01262, -0.01236});
    CHECK(g.den == std::vector<double>{1.0, -2.957, 2.915, -0.9581});
    CHECK(g.ts == 0.05);
    CHECK(std::abs(eval_freq(g, 0.0)) == doctest::Approx(2.6).epsilon(1e-3));
}

TEST_CASE("inner plant is the differenced vehicle model") {
    const auto gi = vehicle_inner_plant();
    const auto g = vehicle_tf();
    for (double w : {0.1, 1.0, 10.0, 30.0}) {
        const auto zinv = std::exp(std::complex<double>{0.0, -w * g.ts});
        const auto expect = eval_freq(g, w) * (1.0 - zinv) / g.ts;
        CHECK(std::abs(eval_freq(gi, w) - expect) < 1e-10 * std::max(1.0, std::abs(expect)));
    }
}

TEST_CASE("inner plant magnitude rule over the default grid") {
    // (1/Ts) max|Gi| on the published coefficients; the value is pinned from
    // two independent evaluation routes and guards against regressions
    const auto gi = vehicle_inner_plant();
    const auto grid = FrequencyGrid::log_default(gi.ts);
    const auto b = alpha_bound(gi, 7.5, 1, AlphaRule::upper_first, grid);
    CHECK(b.bound == doctest::Approx(66.014).epsilon(1e-3));
}

TEST_CASE("outer plant approaches the direct chain at large inner alpha") {
    IpdConfig inner;
    inner.n = 1;
    inner.c = 7.5;
    inner.ts = 0.05;
    inner.kp = 20.0;
    inner.kd = 0.0;
    const auto gi = vehicle_inner_plant();
    const auto grid = FrequencyGrid::log_default(0.05);
    double maxmag = 0.0;
    for (double w : grid.omegas())
        maxmag = std::max(maxmag, std::abs(eval_freq(gi, w)));
    inner.alpha = 10.0 * maxmag / inner.ts;

    const auto outer = vehicle_outer_plant(inner);
    // direct chain: (1/alpha) Gi/(1-z^-1) * Ts/(1-z^-1)
    const DiscreteTransferFunction integ1({1.0 / inner.alpha}, {1.0, -1.0}, 0.05);
    const DiscreteTransferFunction integ2({0.05}, {1.0, -1.0}, 0.05);
    const auto direct = series(series(integ1, gi), integ2);
    const auto ws = grid.omegas();
    for (int i = 1; i <= 10; ++i) {
        const double w = ws[ws.size() / 12 * static_cast<std::size_t>(i)];
        const auto a = eval_freq(outer, w);
        const auto d = eval_freq(direct, w);
        CHECK(std::abs(a - d) <= 0.1000001 * std::abs(a));
    }
}

TEST_CASE("outer plant keeps full rational degree") {
    IpdConfig inner;
    inner.n = 1;
    inner.alpha = 1475.05;
    inner.kp = 20.0;
    inner.kd = 0.0;
    inner.c = 7.5;
    inner.ts = 0.05;
    const auto outer = vehicle_outer_plant(inner);
    // integrator + D-loop closure around the differenced third-order model
    CHECK(outer.den.size() >= 6);
    CHECK(outer.ts == 0.05);
}
