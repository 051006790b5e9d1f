#include "mfcd/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mfcd/simulate.hpp"

namespace mfcd {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

const char* to_string(AlphaRule rule) {
    switch (rule) {
    case AlphaRule::exact_first: return "exact-first";
    case AlphaRule::upper_first: return "upper-first";
    case AlphaRule::exact_second: return "exact-second";
    case AlphaRule::upper_second: return "upper-second";
    }
    return "?";
}

std::optional<AlphaRule> alpha_rule_from_string(const std::string& name) {
    if (name == "exact-first") return AlphaRule::exact_first;
    if (name == "upper-first") return AlphaRule::upper_first;
    if (name == "exact-second") return AlphaRule::exact_second;
    if (name == "upper-second") return AlphaRule::upper_second;
    return std::nullopt;
}

AlphaBound alpha_bound(const DiscreteTransferFunction& g, double c, int n, AlphaRule rule,
                       const FrequencyGrid& grid, double margin) {
    if (n != 1 && n != 2)
        throw Error("ultra-local order n must be 1 or 2");
    const double ts = g.ts;
    double sup = 0.0;
    for (double w : grid.omegas()) {
        const Complex gv = eval_freq(g, w);
        double val;
        switch (rule) {
        case AlphaRule::upper_first:
            val = std::abs(gv) / ts;
            break;
        case AlphaRule::upper_second:
            val = 2.0 * std::abs(gv) / (ts * ts);
            break;
        case AlphaRule::exact_first:
        case AlphaRule::exact_second: {
            const Complex zinv = std::exp(Complex{0.0, -w * ts});
            const Complex filt = c + (1.0 - c) * zinv;
            if (rule == AlphaRule::exact_first)
                val = std::abs(gv / filt) / ts;
            else
                val = std::abs(gv / (filt * filt)) / (ts * ts);
            break;
        }
        default:
            val = 0.0;
        }
        if (!std::isfinite(val)) {
            std::ostringstream os;
            os << "plant magnitude is not finite at omega = " << w << " rad/s";
            throw NumericalError(os.str());
        }
        sup = std::max(sup, val);
    }
    AlphaBound out{sup, rule, margin, sup * margin, grid};
    return out;
}

namespace {

double principal_arg(const DiscreteTransferFunction& tf, double omega) {
    return std::arg(eval_freq(tf, omega));
}

// phase at omega continued from a nearby known unwrapped value
double continued_phase(const DiscreteTransferFunction& tf, double omega, double near_phase) {
    double ph = principal_arg(tf, omega);
    const double two_pi = 2.0 * kPi;
    const double k = std::round((near_phase - ph) / two_pi);
    return ph + k * two_pi;
}

} // namespace

std::optional<double> phase_crossover(const DiscreteTransferFunction& tf, const FrequencyGrid& grid) {
    const std::vector<double> ws = grid.omegas();
    std::vector<double> ph(ws.size());
    ph[0] = principal_arg(tf, ws[0]);
    for (std::size_t i = 1; i < ws.size(); ++i)
        ph[i] = continued_phase(tf, ws[i], ph[i - 1]);

    const auto shifted = [&](std::size_t i) { return ph[i] + kPi; };
    for (std::size_t i = 0; i + 1 < ws.size(); ++i) {
        const double s0 = shifted(i), s1 = shifted(i + 1);
        if (s0 == 0.0)
            return ws[i];
        if ((s0 > 0.0 && s1 <= 0.0) || (s0 < 0.0 && s1 >= 0.0)) {
            double lo = ws[i], hi = ws[i + 1];
            double ph_lo = ph[i];
            const bool descending = s0 > 0.0;
            for (int it = 0; it < 200 && (hi - lo) > 1e-6 * lo; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double pm = continued_phase(tf, mid, ph_lo);
                const double sm = pm + kPi;
                if ((descending && sm > 0.0) || (!descending && sm < 0.0)) {
                    lo = mid;
                    ph_lo = pm;
                } else {
                    hi = mid;
                }
            }
            return 0.5 * (lo + hi);
        }
    }
    // crossing exactly at the grid's upper boundary
    if (std::abs(shifted(ws.size() - 1)) < 1e-9)
        return ws.back();
    return std::nullopt;
}

double ModuleEllipse::lhs(double kp, double kd) const {
    const double kpp = kp * ts;
    return q11 * kpp * kpp + 2.0 * q12 * kpp * kd + q22 * kd * kd;
}

bool ModuleEllipse::degenerate() const {
    return det() <= 1e-12 * std::max({q11 * q22, q12 * q12, 1e-300});
}

std::pair<double, double> ModuleEllipse::extent() const {
    if (degenerate()) {
        const double inf = std::numeric_limits<double>::infinity();
        return {inf, inf};
    }
    const double d = det();
    return {std::sqrt(rhs * q22 / d) / ts, std::sqrt(rhs * q11 / d)};
}

std::vector<std::pair<double, double>> ModuleEllipse::boundary_points(int count) const {
    std::vector<std::pair<double, double>> pts;
    if (degenerate() || count <= 0)
        return pts;
    // eigendecomposition of the symmetric 2x2 form
    const double tr = q11 + q22;
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det()));
    const double l1 = tr / 2.0 + disc, l2 = tr / 2.0 - disc;
    double v1x, v1y;
    if (std::abs(q12) > 1e-300) {
        v1x = l1 - q22;
        v1y = q12;
    } else {
        v1x = 1.0;
        v1y = 0.0;
    }
    const double n1 = std::hypot(v1x, v1y);
    v1x /= n1;
    v1y /= n1;
    const double v2x = -v1y, v2y = v1x;
    pts.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double th = 2.0 * kPi * static_cast<double>(i) / count;
        const double a = std::sqrt(rhs / l1) * std::cos(th);
        const double b = std::sqrt(rhs / l2) * std::sin(th);
        const double kpp = a * v1x + b * v2x;
        const double kd = a * v1y + b * v2y;
        pts.emplace_back(kpp / ts, kd);
    }
    return pts;
}

ModuleConditionTerms module_condition_terms(double c, double ts, double omega, double kp) {
    return {std::cos(omega * ts), c - 1.0, 2.0 * c - 1.0, kp * ts};
}

ModuleEllipse module_ellipse(const DiscreteTransferFunction& g, double alpha, double c, double ts,
                             double omega) {
    const double gmag = std::abs(eval_freq(g, omega));
    if (gmag == 0.0)
        throw Error("module condition degenerates: |G| = 0 at the requested frequency");
    const auto t = module_condition_terms(c, ts, omega);
    ModuleEllipse e;
    e.q11 = (2.0 * c * t.c_prime + 1.0) - 2.0 * c * t.c_prime * t.b;
    e.q12 = t.c_dprime * (1.0 - t.b);
    e.q22 = 2.0 * (1.0 - t.b);
    const double r = alpha * ts / gmag;
    e.rhs = r * r * (c * c + t.c_prime * t.c_prime - 2.0 * c * t.c_prime * t.b) * (2.0 - 2.0 * t.b);
    e.omega = omega;
    e.ts = ts;
    return e;
}

namespace {

// inner term of the phase condition: G / ((C + (1-C) z^-1)(1 - z^-1))
Complex phase_inner(const DiscreteTransferFunction& g, double c, double omega) {
    const Complex zinv = std::exp(Complex{0.0, -omega * g.ts});
    return eval_freq(g, omega) / ((c + (1.0 - c) * zinv) * (1.0 - zinv));
}

// tangent form of the phase condition at one frequency:
// sin(th) / (A1/E1 - cos(th)) > -tan(arg(inner))
bool phase_tan_condition(const DiscreteTransferFunction& g, double c, double omega, double kp,
                         double kd) {
    const double ts = g.ts;
    const double th = omega * ts;
    const double a1 = kp * ts * c + kd + 1.0;
    const double e1 = kp * ts * (c - 1.0) + kd + 1.0;
    const double lhs = std::sin(th) / (a1 / e1 - std::cos(th));
    const double rhs = -std::tan(std::arg(phase_inner(g, c, omega)));
    return lhs > rhs;
}

} // namespace

bool PhaseLine::satisfied(double kp, double kd) const {
    if (feasible == LineSide::non_binding)
        return true;
    double signed_dist;
    if (vertical)
        signed_dist = kp;
    else
        signed_dist = kd - (slope * kp + intercept);
    return feasible == LineSide::above ? signed_dist > 0.0 : signed_dist < 0.0;
}

PhaseLine phase_line(const DiscreteTransferFunction& g, double c, double ts, double omega) {
    if (g.ts != ts)
        throw SampleTimeMismatch(g.ts, ts);
    const double th = omega * ts;
    const double phi = std::arg(phase_inner(g, c, omega));
    double w;
    if (std::abs(std::cos(phi)) < 1e-12) {
        // tangent singularity: sin/tan -> 0
        w = std::cos(th);
    } else {
        const double t = std::tan(phi);
        w = (t == 0.0) ? std::copysign(std::numeric_limits<double>::infinity(), std::sin(th))
                       : std::cos(th) - std::sin(th) / t;
    }

    PhaseLine line;
    line.w = w;
    line.omega = omega;
    line.ts = ts;
    line.intercept = -1.0;
    if (w == 1.0) {
        line.vertical = true;
        line.slope = 0.0;
    } else if (!std::isfinite(w)) {
        line.slope = -ts * (c - 1.0); // limit of (C - W(C-1))/(W-1) as W -> inf
    } else {
        line.slope = ts * (c - w * (c - 1.0)) / (w - 1.0);
    }

    // orient: probe the tangent form of the condition on both sides of the line
    const double kp_probe = line.vertical ? 0.0 : 1.0 / ts;
    const double kd_line = line.vertical ? 0.0 : line.slope * kp_probe + line.intercept;
    const double delta = std::max(1.0, 0.1 * std::abs(kd_line));
    bool up, down;
    if (line.vertical) {
        up = phase_tan_condition(g, c, omega, delta, 0.0);
        down = phase_tan_condition(g, c, omega, -delta, 0.0);
    } else {
        up = phase_tan_condition(g, c, omega, kp_probe, kd_line + delta);
        down = phase_tan_condition(g, c, omega, kp_probe, kd_line - delta);
    }
    if (up && !down)
        line.feasible = LineSide::above;
    else if (down && !up)
        line.feasible = LineSide::below;
    else
        line.feasible = LineSide::non_binding;
    return line;
}

namespace {

DiscreteTransferFunction over_filter(const DiscreteTransferFunction& g, double c) {
    return series(g, DiscreteTransferFunction({1.0}, {c, 1.0 - c}, g.ts));
}

double grid_max_magnitude(const DiscreteTransferFunction& g, const FrequencyGrid& grid,
                          double* argmax_omega = nullptr) {
    double best = -1.0, best_w = 0.0;
    for (double w : grid.omegas()) {
        const double m = std::abs(eval_freq(g, w));
        if (m > best) {
            best = m;
            best_w = w;
        }
    }
    if (argmax_omega)
        *argmax_omega = best_w;
    return best;
}

} // namespace

ModuleEllipse simplified_module_bound(const DiscreteTransferFunction& g, double alpha, double c,
                                      double ts, SimplifiedVariant variant, const FrequencyGrid& grid) {
    const std::optional<double> omega0 = phase_crossover(over_filter(g, c), grid);
    double omega_b;
    if (omega0) {
        omega_b = *omega0;
    } else {
        grid_max_magnitude(g, grid, &omega_b);
    }

    double gmag;
    if (variant == SimplifiedVariant::conservative) {
        gmag = grid_max_magnitude(g, grid);
    } else {
        const std::optional<double> omega1 = phase_crossover(g, grid);
        if (!omega1)
            throw Error("permissive simplified bound requires the plant phase crossover omega_1");
        gmag = std::abs(eval_freq(g, *omega1));
    }
    if (gmag == 0.0)
        throw Error("module condition degenerates: |G| = 0");

    ModuleEllipse e = module_ellipse(g, alpha, c, ts, omega_b);
    const double r = alpha * ts / gmag;
    const double b = std::cos(omega_b * ts);
    const double cp = c - 1.0;
    e.rhs = r * r * (c * c + cp * cp - 2.0 * c * cp * b) * (2.0 - 2.0 * b);
    return e;
}

PhaseLine simplified_phase_line(double c, double ts) {
    PhaseLine line;
    line.slope = -ts * (2.0 * c - 1.0) / 2.0;
    line.intercept = -1.0;
    line.feasible = LineSide::above;
    line.ts = ts;
    line.omega = 0.0;
    line.w = 0.0;
    return line;
}

std::size_t StabilityRegion::predicted_count() const {
    std::size_t n = 0;
    for (const auto& p : grid) n += p.predicted;
    return n;
}
std::size_t StabilityRegion::stable_count() const {
    std::size_t n = 0;
    for (const auto& p : grid) n += p.stable;
    return n;
}
std::size_t StabilityRegion::predicted_and_stable_count() const {
    std::size_t n = 0;
    for (const auto& p : grid) n += p.predicted && p.stable;
    return n;
}

namespace {

// closed-loop characteristic polynomial assembled linearly in (kp, kd):
// cl(kp, kd) = p0 + kp * pa + kd * pb + pc
struct CharPolyBasis {
    std::vector<double> p0, pa, pb, pc;

    CharPolyBasis(const DiscreteTransferFunction& g, const RegionSpec& spec) {
        const std::vector<double> dnum{1.0, -1.0};
        const std::vector<double> dden{spec.c, 1.0 - spec.c};
        const double ts = spec.ts;
        if (spec.n == 1) {
            p0 = poly::scale(poly::mul(poly::mul({1.0, -1.0}, dden), g.den), spec.alpha * ts);
            pa = poly::scale(poly::mul(dden, g.num), ts);
            pb = poly::mul(dnum, g.num);
            pc = pb;
        } else {
            const auto dd2 = poly::mul(dden, dden);
            p0 = poly::scale(poly::mul(poly::mul({1.0, -1.0}, dd2), g.den), spec.alpha * ts * ts);
            pa = poly::scale(poly::mul(dd2, g.num), ts * ts);
            pb = poly::scale(poly::mul(poly::mul(dnum, dden), g.num), ts);
            pc = poly::mul(poly::mul(dnum, dnum), g.num);
        }
    }

    bool stable(double kp, double kd, double ts) const {
        std::vector<double> cl = poly::addp(p0, poly::addp(poly::scale(pa, kp), poly::scale(pb, kd)));
        cl = poly::addp(cl, pc);
        if (poly::trim(cl)[0] == 0.0)
            return false; // improper closed loop
        const DiscreteTransferFunction probe({1.0}, cl, ts);
        return is_stable(probe);
    }
};

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    return v;
}

} // namespace

StabilityRegion build_region(const DiscreteTransferFunction& g, const RegionSpec& spec,
                             std::pair<double, double> kp_range, std::pair<double, double> kd_range,
                             int resolution, const FrequencyGrid& grid) {
    if (resolution < 2)
        throw Error("region resolution must be at least 2");
    StabilityRegion region;
    region.spec = spec;
    region.resolution = resolution;

    region.omega0 = phase_crossover(over_filter(g, spec.c), grid);
    region.omega1 = phase_crossover(g, grid);
    region.omega0_found = region.omega0.has_value();

    double omega_mod;
    if (region.omega0) {
        omega_mod = *region.omega0;
    } else {
        // no crossover: bind the module condition where the plant magnitude peaks
        grid_max_magnitude(g, grid, &omega_mod);
    }
    region.ellipse = module_ellipse(g, spec.alpha, spec.c, spec.ts, omega_mod);

    if (spec.n == 1 && region.omega0)
        region.line = phase_line(g, spec.c, spec.ts, *region.omega0 / 2.0);
    region.simplified_line = simplified_phase_line(spec.c, spec.ts);

    const CharPolyBasis basis(g, spec);
    const auto kps = linspace(kp_range.first, kp_range.second, resolution);
    const auto kds = linspace(kd_range.first, kd_range.second, resolution);
    region.grid.reserve(static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution));
    for (double kp : kps) {
        for (double kd : kds) {
            RegionPoint pt;
            pt.kp = kp;
            pt.kd = kd;
            const bool phase_ok = (spec.n == 1)
                                      ? (!region.line || region.line->satisfied(kp, kd))
                                      : region.simplified_line.satisfied(kp, kd);
            pt.predicted = region.ellipse.contains(kp, kd) && phase_ok;
            pt.stable = basis.stable(kp, kd, spec.ts);
            region.grid.push_back(pt);
        }
    }
    return region;
}

IpdConfig best_config_search(const StabilityRegion& region, const DiscreteTransferFunction& plant,
                             const SimSpec& sim_spec, Criterion criterion) {
    (void)criterion; // IAE is the only supported criterion
    bool found = false;
    double best_iae = std::numeric_limits<double>::infinity();
    IpdConfig best;
    for (const RegionPoint& pt : region.grid) {
        if (!pt.stable)
            continue;
        IpdConfig cfg;
        cfg.n = region.spec.n;
        cfg.alpha = region.spec.alpha;
        cfg.c = region.spec.c;
        cfg.ts = region.spec.ts;
        cfg.kp = pt.kp;
        cfg.kd = pt.kd;
        SimOptions opts;
        opts.servo = sim_spec.servo;
        opts.u_limits = sim_spec.u_limits;
        const SimTrace trace = simulate_loop(plant, cfg, sim_spec.y_ref, opts);
        const double iae = trace.diverged ? std::numeric_limits<double>::infinity()
                                          : compute_metrics(trace).iae;
        const bool better =
            !found || iae < best_iae ||
            (iae == best_iae && (cfg.kd < best.kd || (cfg.kd == best.kd && cfg.kp < best.kp)));
        if (better) {
            best = cfg;
            best_iae = iae;
            found = true;
        }
    }
    if (!found)
        throw Error("best_config_search requires at least one verified-stable configuration");
    return best;
}

} // namespace mfcd
