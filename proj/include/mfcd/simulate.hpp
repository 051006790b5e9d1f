#pragma once

// Discrete-time closed-loop simulation of iPD controllers against LTI plants
// (single loop and acceleration-speed cascade), plus the tracking metrics
// used to rank configurations.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "mfcd/ipd.hpp"
#include "mfcd/transfer_function.hpp"

namespace mfcd {

struct SimTrace {
    double ts = 0.0;
    std::vector<double> t;
    std::vector<double> y_ref;
    std::vector<double> y;
    std::vector<double> e;
    std::vector<double> u;
    std::vector<double> inner_ref; // cascade runs only
    std::vector<double> inner_y;
    bool diverged = false;

    std::size_t size() const { return t.size(); }
};

struct SimOptions {
    bool servo = false;
    std::optional<std::pair<double, double>> u_limits;
    // added to the plant output before the controller sees it (the plant's own
    // recursion is not affected); shorter sequences are zero-extended
    std::vector<double> y_disturbance;
};

/// Closed single loop: plant realized as a difference equation (must be
/// strictly proper), controller stepped through ipd_step. Saturation, when
/// given, applies both to the plant input and to the estimator's view of the
/// action. Aborts with the diverged flag once |y| exceeds 1e9.
SimTrace simulate_loop(const DiscreteTransferFunction& plant, const IpdConfig& cfg,
                       const std::vector<double>& y_ref, const SimOptions& options = {});

struct CascadeSpec {
    IpdConfig outer; // speed loop
    IpdConfig inner; // acceleration loop
    DiscreteTransferFunction plant; // input -> output, e.g. pedal -> speed
    bool inner_plant_derivation = true; // inner loop sees plant * (1 - z^-1)/Ts
    bool accel_feedforward = false;
    std::optional<std::pair<double, double>> u_limits;
    // externally supplied acceleration reference for the feedforward; when
    // empty it is derived by differencing y_ref
    std::vector<double> accel_ref;
    // diagnostic hook: when set, the outer controller is bypassed and this
    // sequence is used as the inner loop's reference directly
    std::optional<std::vector<double>> outer_bypass;
    bool servo_outer = false;
    bool servo_inner = false;
};

SimTrace simulate_cascade(const CascadeSpec& spec, const std::vector<double>& y_ref);

struct Metrics {
    double iae = 0.0;   // Ts * sum |e|
    double iaudd = 0.0; // sum |u_k - 2 u_{k-1} + u_{k-2}|
    double os = 0.0;    // largest negative error after an upward reference change
};

Metrics compute_metrics(const SimTrace& trace);

/// Reproducible piecewise-constant-acceleration speed profile covering
/// [0, v_max] m/s: random targets approached at a fixed ramp rate with random
/// holds in between. Identical output for identical arguments.
std::vector<double> speed_profile(double ts, double duration, std::uint64_t seed,
                                  double v_max = 100.0 / 3.6);

} // namespace mfcd
