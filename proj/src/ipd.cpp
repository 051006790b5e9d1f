#include "mfcd/ipd.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace mfcd {

std::vector<std::string> validate(const IpdConfig& cfg) {
    if (cfg.n != 1 && cfg.n != 2)
        throw Error("ultra-local order n must be 1 or 2");
    if (cfg.alpha == 0.0)
        throw Error("alpha must be nonzero");
    if (cfg.c == 0.0)
        throw Error("filter parameter C must be nonzero");
    if (!(cfg.ts > 0.0))
        throw Error("sample time must be positive");
    std::vector<std::string> warnings;
    if (!(std::abs(cfg.filter_pole()) < 1.0))
        warnings.push_back("derivative filter pole (C-1)/C = " + std::to_string(cfg.filter_pole()) +
                           " lies outside the unit circle; the filter is not proper");
    return warnings;
}

std::string to_json(const IpdConfig& cfg) {
    nlohmann::json j;
    j["n"] = cfg.n;
    j["alpha"] = cfg.alpha;
    j["kp"] = cfg.kp;
    j["kd"] = cfg.kd;
    j["c"] = cfg.c;
    j["ts"] = cfg.ts;
    return j.dump();
}

IpdConfig ipd_config_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    IpdConfig cfg;
    cfg.n = j.at("n").get<int>();
    cfg.alpha = j.at("alpha").get<double>();
    cfg.kp = j.at("kp").get<double>();
    cfg.kd = j.at("kd").get<double>();
    cfg.c = j.at("c").get<double>();
    cfg.ts = j.at("ts").get<double>();
    validate(cfg);
    return cfg;
}

DiscreteTransferFunction filtered_derivative_tf(double c, double ts) {
    if (c == 0.0)
        throw Error("filter parameter C must be nonzero");
    if (!(ts > 0.0))
        throw Error("sample time must be positive");
    return {{1.0 / ts, -1.0 / ts}, {c, 1.0 - c}, ts};
}

DiscreteTransferFunction pd_tf(double kp, double kd, double c, double ts) {
    // Kp + Kd (1/Ts)(1-z^-1)/(C+(1-C)z^-1) over the filter denominator
    return {{kp * c + kd / ts, kp * (1.0 - c) - kd / ts}, {c, 1.0 - c}, ts};
}

namespace {

// numerator of Kp + Kd D + D^n over the common denominator dden^n, and that
// common denominator, both scaled by ts^n to keep coefficients near unity
std::vector<double> compensator_num(const IpdConfig& cfg) {
    const std::vector<double> dnum{1.0, -1.0};        // ts * D numerator
    const std::vector<double> dden{cfg.c, 1.0 - cfg.c};
    if (cfg.n == 1) {
        // ts * (Kp dden + (Kd + 1) dnum/ts) = Kp ts dden + (Kd+1) dnum
        return poly::addp(poly::scale(dden, cfg.kp * cfg.ts), poly::scale(dnum, cfg.kd + 1.0));
    }
    // ts^2 * (Kp dden^2 + Kd dnum dden / ts + dnum^2 / ts^2)
    const auto dd2 = poly::mul(dden, dden);
    return poly::addp(poly::addp(poly::scale(dd2, cfg.kp * cfg.ts * cfg.ts),
                                 poly::scale(poly::mul(dnum, dden), cfg.kd * cfg.ts)),
                      poly::mul(dnum, dnum));
}

std::vector<double> compensator_den(const IpdConfig& cfg) {
    const std::vector<double> dden{cfg.c, 1.0 - cfg.c};
    std::vector<double> d = poly::mul({1.0, -1.0}, dden); // (1 - z^-1) dden
    if (cfg.n == 2)
        d = poly::mul(d, dden);
    const double s = cfg.alpha * (cfg.n == 1 ? cfg.ts : cfg.ts * cfg.ts);
    return poly::scale(d, s);
}

} // namespace

DiscreteTransferFunction ipd_open_loop_tf(const DiscreteTransferFunction& g, const IpdConfig& cfg) {
    if (g.ts != cfg.ts)
        throw SampleTimeMismatch(g.ts, cfg.ts);
    validate(cfg);
    const auto cn = compensator_num(cfg);
    const auto cd = compensator_den(cfg);
    return series(DiscreteTransferFunction(cn, cd, cfg.ts), g);
}

DiscreteTransferFunction inner_loop_tf(const DiscreteTransferFunction& g, double alpha, double c,
                                       double ts, int n) {
    if (g.ts != ts)
        throw SampleTimeMismatch(g.ts, ts);
    if (n != 1 && n != 2)
        throw Error("ultra-local order n must be 1 or 2");
    const DiscreteTransferFunction direct =
        series(DiscreteTransferFunction({1.0 / alpha}, {1.0, -1.0}, ts), g);
    DiscreteTransferFunction dn = filtered_derivative_tf(c, ts);
    if (n == 2)
        dn = series(dn, dn);
    return feedback(direct, dn);
}

DiscreteTransferFunction closed_loop_tf(const DiscreteTransferFunction& g, const IpdConfig& cfg) {
    return feedback(ipd_open_loop_tf(g, cfg), DiscreteTransferFunction::constant(1.0, cfg.ts));
}

void ControllerState::reset() {
    f_hat = 0.0;
    u_prev = 0.0;
    std::fill(y_filter.begin(), y_filter.end(), 0.0);
    std::fill(yr_filter.begin(), yr_filter.end(), 0.0);
    e_filter = 0.0;
}

namespace {

// One first-order section of D(z) in controllable canonical form:
// w_k = x_k - a1 w_{k-1}, out = b0 w_k + b1 w_{k-1}
inline double section_step(double& w, double x, double a1, double b0, double b1) {
    const double w_new = x - a1 * w;
    const double out = b0 * w_new + b1 * w;
    w = w_new;
    return out;
}

} // namespace

double ipd_step(ControllerState& state, const IpdConfig& cfg, double y_meas, double y_ref, bool servo) {
    const double a1 = (1.0 - cfg.c) / cfg.c;
    const double b0 = 1.0 / (cfg.c * cfg.ts);
    const double b1 = -b0;

    double y_deriv = y_meas;
    for (double& w : state.y_filter)
        y_deriv = section_step(w, y_deriv, a1, b0, b1);

    double yr_deriv = y_ref;
    for (double& w : state.yr_filter)
        yr_deriv = section_step(w, yr_deriv, a1, b0, b1);

    state.f_hat = y_deriv - cfg.alpha * state.u_prev;

    const double e = y_ref - y_meas;
    const double e_deriv = section_step(state.e_filter, e, a1, b0, b1);

    const double u = (-state.f_hat + (servo ? yr_deriv : 0.0) + cfg.kp * e + cfg.kd * e_deriv) / cfg.alpha;
    state.u_prev = u;
    return u;
}

void apply_actuation(ControllerState& state, double u_applied) {
    state.u_prev = u_applied;
}

} // namespace mfcd
