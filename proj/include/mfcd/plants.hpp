#pragma once

// The two worked plants: the inverted pendulum (angle from cart force) and an
// identified vehicle longitudinal model (speed from pedal), plus the derived
// inner/outer plants of the acceleration-speed cascade.

#include "mfcd/ipd.hpp"
#include "mfcd/transfer_function.hpp"

namespace mfcd {

struct PendulumParams {
    double cart_mass = 0.1;  // M, kg
    double pend_mass = 0.5;  // m, kg
    double length = 0.5;     // l, m
    double inertia = 0.125;  // I, kg m^2; defaults to m l^2
    double friction = 2.0;   // b, kg m^2 / s
    double gravity = 9.8;    // g, m/s^2

    static PendulumParams reference();
};

/// Transfer from cart force to pendulum angle, linearized about upright:
/// (I + m l^2 + m^2 l^2/(M+m)) th'' + b th' - m g l th = (m l/(M+m)) u.
ContinuousSecondOrder pendulum_continuous(const PendulumParams& p);

DiscreteTransferFunction pendulum_discrete(const PendulumParams& p, double ts,
                                           DiscretizationMethod method = DiscretizationMethod::zoh);

/// Identified pedal -> speed model, Ts = 0.05 s.
DiscreteTransferFunction vehicle_tf();

/// Acceleration plant seen by the inner loop: G * (1 - z^-1)/Ts.
DiscreteTransferFunction vehicle_inner_plant();

/// Plant seen by the outer loop: the inner closed loop (D-loop at the inner
/// configuration's alpha and C) in series with the integrator Ts/(1 - z^-1).
/// Kept at full rational degree, no cancellation.
DiscreteTransferFunction vehicle_outer_plant(const IpdConfig& inner_cfg);

} // namespace mfcd
