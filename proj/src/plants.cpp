#include "mfcd/plants.hpp"

namespace mfcd {

PendulumParams PendulumParams::reference() {
    return PendulumParams{};
}

ContinuousSecondOrder pendulum_continuous(const PendulumParams& p) {
    if (!(p.cart_mass > 0.0) || !(p.pend_mass >= 0.0) || !(p.length > 0.0) || !(p.inertia >= 0.0) ||
        !(p.friction >= 0.0) || !(p.gravity > 0.0))
        throw Error("pendulum parameters must be positive");
    const double ml = p.pend_mass * p.length;
    const double total = p.cart_mass + p.pend_mass;
    ContinuousSecondOrder sys;
    sys.a2 = p.inertia + ml * p.length + ml * ml / total;
    sys.a1 = p.friction;
    sys.a0 = -ml * p.gravity;
    sys.k = ml / total;
    return sys;
}

DiscreteTransferFunction pendulum_discrete(const PendulumParams& p, double ts,
                                           DiscretizationMethod method) {
    return discretize(pendulum_continuous(p), ts, method);
}

DiscreteTransferFunction vehicle_tf() {
    return {{0.0, 0.01262, -0.01236}, {1.0, -2.957, 2.915, -0.9581}, 0.05};
}

DiscreteTransferFunction vehicle_inner_plant() {
    const DiscreteTransferFunction g = vehicle_tf();
    const DiscreteTransferFunction diff({1.0 / g.ts, -1.0 / g.ts}, {1.0}, g.ts);
    return series(g, diff);
}

DiscreteTransferFunction vehicle_outer_plant(const IpdConfig& inner_cfg) {
    const DiscreteTransferFunction inner = vehicle_inner_plant();
    const DiscreteTransferFunction closed =
        inner_loop_tf(inner, inner_cfg.alpha, inner_cfg.c, inner_cfg.ts, inner_cfg.n);
    const DiscreteTransferFunction integrator({inner_cfg.ts}, {1.0, -1.0}, inner_cfg.ts);
    return series(closed, integrator);
}

} // namespace mfcd
