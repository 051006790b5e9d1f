#include "mfcd/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace mfcd {

namespace {

constexpr double kDivergenceLimit = 1e9;

// y_k = (sum_{j>=1} b_j u_{k-j} - sum_{j>=1} a_j y_{k-j}) / a0
class DifferenceEquation {
public:
    explicit DifferenceEquation(const DiscreteTransferFunction& tf)
        : num_(tf.num), den_(tf.den), u_hist_(num_.size() > 1 ? num_.size() - 1 : 0, 0.0),
          y_hist_(den_.size() - 1, 0.0) {
        if (num_[0] != 0.0)
            throw Error("closed-loop simulation requires a strictly proper plant (num[0] == 0)");
    }

    double next_output() const {
        double acc = 0.0;
        for (std::size_t j = 0; j < u_hist_.size(); ++j)
            acc += num_[j + 1] * u_hist_[j];
        for (std::size_t j = 0; j < y_hist_.size(); ++j)
            acc -= den_[j + 1] * y_hist_[j];
        return acc / den_[0];
    }

    void push(double u, double y) {
        if (!u_hist_.empty()) {
            std::rotate(u_hist_.rbegin(), u_hist_.rbegin() + 1, u_hist_.rend());
            u_hist_[0] = u;
        }
        if (!y_hist_.empty()) {
            std::rotate(y_hist_.rbegin(), y_hist_.rbegin() + 1, y_hist_.rend());
            y_hist_[0] = y;
        }
    }

private:
    std::vector<double> num_, den_;
    std::vector<double> u_hist_, y_hist_;
};

double clamp_control(double u, const std::optional<std::pair<double, double>>& limits) {
    if (!limits)
        return u;
    return std::min(std::max(u, limits->first), limits->second);
}

} // namespace

SimTrace simulate_loop(const DiscreteTransferFunction& plant, const IpdConfig& cfg,
                       const std::vector<double>& y_ref, const SimOptions& options) {
    if (plant.ts != cfg.ts)
        throw SampleTimeMismatch(plant.ts, cfg.ts);
    validate(cfg);

    DifferenceEquation de(plant);
    ControllerState state(cfg);

    SimTrace trace;
    trace.ts = cfg.ts;
    const std::size_t n = y_ref.size();
    trace.t.reserve(n);

    for (std::size_t k = 0; k < n; ++k) {
        const double y_plant = de.next_output();
        const double dist = k < options.y_disturbance.size() ? options.y_disturbance[k] : 0.0;
        const double y_meas = y_plant + dist;
        const double r = y_ref[k];

        double u = ipd_step(state, cfg, y_meas, r, options.servo);
        if (options.u_limits) {
            u = clamp_control(u, options.u_limits);
            apply_actuation(state, u);
        }
        de.push(u, y_plant);

        trace.t.push_back(static_cast<double>(k) * cfg.ts);
        trace.y_ref.push_back(r);
        trace.y.push_back(y_meas);
        trace.e.push_back(r - y_meas);
        trace.u.push_back(u);

        if (std::abs(y_meas) > kDivergenceLimit) {
            trace.diverged = true;
            break;
        }
    }
    return trace;
}

SimTrace simulate_cascade(const CascadeSpec& spec, const std::vector<double>& y_ref) {
    if (spec.plant.ts != spec.outer.ts || spec.plant.ts != spec.inner.ts)
        throw Error("cascade requires one common sample time");
    validate(spec.outer);
    validate(spec.inner);

    const double ts = spec.plant.ts;
    DifferenceEquation de(spec.plant);
    ControllerState outer_state(spec.outer);
    ControllerState inner_state(spec.inner);

    SimTrace trace;
    trace.ts = ts;
    double v_prev = 0.0;
    double r_prev = y_ref.empty() ? 0.0 : y_ref[0];

    for (std::size_t k = 0; k < y_ref.size(); ++k) {
        const double v = de.next_output();
        const double a_meas = spec.inner_plant_derivation ? (v - v_prev) / ts : v;
        v_prev = v;
        const double r = y_ref[k];

        double a_cmd;
        if (spec.outer_bypass) {
            a_cmd = k < spec.outer_bypass->size() ? (*spec.outer_bypass)[k] : 0.0;
        } else {
            a_cmd = ipd_step(outer_state, spec.outer, v, r, spec.servo_outer);
        }
        if (spec.accel_feedforward) {
            const double ff = k < spec.accel_ref.size() ? spec.accel_ref[k] : (r - r_prev) / ts;
            a_cmd += ff;
        }
        r_prev = r;

        double u = ipd_step(inner_state, spec.inner, a_meas, a_cmd, spec.servo_inner);
        if (spec.u_limits) {
            u = clamp_control(u, spec.u_limits);
            apply_actuation(inner_state, u);
        }
        de.push(u, v);

        trace.t.push_back(static_cast<double>(k) * ts);
        trace.y_ref.push_back(r);
        trace.y.push_back(v);
        trace.e.push_back(r - v);
        trace.u.push_back(u);
        trace.inner_ref.push_back(a_cmd);
        trace.inner_y.push_back(a_meas);

        if (std::abs(v) > kDivergenceLimit) {
            trace.diverged = true;
            break;
        }
    }
    return trace;
}

Metrics compute_metrics(const SimTrace& trace) {
    const std::size_t n = trace.size();
    if (n < 3)
        throw Error("metrics require a trace of at least 3 samples");

    Metrics m;
    for (double e : trace.e)
        m.iae += std::abs(e);
    m.iae *= trace.ts;

    for (std::size_t k = 2; k < trace.u.size(); ++k)
        m.iaudd += std::abs(trace.u[k] - 2.0 * trace.u[k - 1] + trace.u[k - 2]);

    // negative-error peaks inside windows that start at an upward reference
    // change and end at the next change of any direction
    double prev_ref = 0.0;
    bool in_up_window = false;
    for (std::size_t k = 0; k < n; ++k) {
        const double r = trace.y_ref[k];
        if (k == 0 ? (r != 0.0) : (r != prev_ref))
            in_up_window = r > prev_ref;
        prev_ref = r;
        if (in_up_window)
            m.os = std::max(m.os, -trace.e[k]);
    }
    m.os = std::max(m.os, 0.0);
    return m;
}

namespace {

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace

std::vector<double> speed_profile(double ts, double duration, std::uint64_t seed, double v_max) {
    std::mt19937_64 rng(seed);
    const std::size_t n = static_cast<std::size_t>(duration / ts) + 1;
    std::vector<double> profile;
    profile.reserve(n);

    const double ramp = 1.5; // m/s^2
    double v = 0.0;
    double target = v_max * uniform01(rng);
    double hold_left = 0.0;

    for (std::size_t k = 0; k < n; ++k) {
        profile.push_back(v);
        if (hold_left > 0.0) {
            hold_left -= ts;
            if (hold_left <= 0.0)
                target = v_max * uniform01(rng);
            continue;
        }
        const double dv = target - v;
        if (std::abs(dv) <= ramp * ts) {
            v = target;
            hold_left = 5.0 + 10.0 * uniform01(rng);
        } else {
            v += std::copysign(ramp * ts, dv);
        }
    }
    return profile;
}

} // namespace mfcd
