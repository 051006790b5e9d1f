#pragma once

// The iPD control law: an ultra-local model y^(n) = F + alpha*u inverted by
// u = (-F_hat + y_r^(n) + Kp e + Kd e_dot)/alpha, with F_hat estimated from
// the filtered n-th output derivative and the previous control action.
// Provides both the runtime difference-equation controller and the loop
// transfer functions used by the frequency design method.

#include <string>
#include <vector>

#include "mfcd/transfer_function.hpp"

namespace mfcd {

struct IpdConfig {
    int n = 1;          // ultra-local order, 1 or 2
    double alpha = 1.0; // input-to-output ratio, != 0
    double kp = 0.0;
    double kd = 0.0;
    double c = 1.0;  // derivative filter parameter, != 0
    double ts = 1.0; // sample time in seconds, > 0

    /// Pole of the derivative filter denominator, (c-1)/c.
    double filter_pole() const { return (c - 1.0) / c; }
};

/// Throws on hard invariant violations; returns human-readable warnings for
/// soft ones (an unstable derivative-filter pole is warned, not rejected).
std::vector<std::string> validate(const IpdConfig& cfg);

std::string to_json(const IpdConfig& cfg);
IpdConfig ipd_config_from_json(const std::string& text);

/// D(z) = (1/Ts) (1 - z^-1) / (C + (1-C) z^-1).
DiscreteTransferFunction filtered_derivative_tf(double c, double ts);

/// Kp + Kd D(z) as a single rational.
DiscreteTransferFunction pd_tf(double kp, double kd, double c, double ts);

/// Error-feedback equivalent compensator in series with the plant:
/// [(Kp + Kd D + D^n) / (alpha (1 - z^-1))] * G.
DiscreteTransferFunction ipd_open_loop_tf(const DiscreteTransferFunction& g, const IpdConfig& cfg);

/// Inner loop closed by D^n around (1/alpha) G / (1 - z^-1).
DiscreteTransferFunction inner_loop_tf(const DiscreteTransferFunction& g, double alpha, double c,
                                       double ts, int n);

/// Closed loop of the open-loop compensator under unity error feedback; the
/// denominator of this function carries the characteristic polynomial used by
/// the stability classifier.
DiscreteTransferFunction closed_loop_tf(const DiscreteTransferFunction& g, const IpdConfig& cfg);

/// Runtime memory of one controller instance. Single-owner mutable; distinct
/// instances are independent.
struct ControllerState {
    double f_hat = 0.0;
    double u_prev = 0.0;
    std::vector<double> y_filter;  // one memory cell per cascaded filter section
    std::vector<double> yr_filter;
    double e_filter = 0.0;

    explicit ControllerState(const IpdConfig& cfg)
        : y_filter(static_cast<std::size_t>(cfg.n), 0.0),
          yr_filter(static_cast<std::size_t>(cfg.n), 0.0) {}

    void reset();
};

/// One control step. Updates the filter chains, the F estimate and u_prev;
/// returns the unconstrained control action. The reference feedforward
/// y_r^(n) enters only in servo mode.
double ipd_step(ControllerState& state, const IpdConfig& cfg, double y_meas, double y_ref, bool servo);

/// Record the action actually applied to the plant (after saturation) so the
/// next F estimate sees it instead of the raw command.
void apply_actuation(ControllerState& state, double u_applied);

} // namespace mfcd
