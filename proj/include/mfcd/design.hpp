#pragma once

// Frequency-based design method for iPD controllers: alpha bounds from the
// plant magnitude, phase-crossover detection, the module-condition quadratic
// and phase-condition line in the Kp-Kd plane, their simplified variants, and
// the assembled stability region with per-point verification.

#include <optional>
#include <utility>
#include <vector>

#include "mfcd/ipd.hpp"
#include "mfcd/transfer_function.hpp"

namespace mfcd {

enum class AlphaRule { exact_first, upper_first, exact_second, upper_second };

const char* to_string(AlphaRule rule);
std::optional<AlphaRule> alpha_rule_from_string(const std::string& name);

struct AlphaBound {
    double bound = 0.0;        // minimal alpha from the chosen rule
    AlphaRule rule = AlphaRule::upper_first;
    double margin = 10.0;      // "much greater" factor
    double alpha_design = 0.0; // bound * margin
    FrequencyGrid grid;
};

/// Minimal alpha over the grid. Exact rules take the supremum of the full
/// filtered expression; upper rules use (1/Ts) max|G| (first order) or
/// (2/Ts^2) max|G| (second order). Throws NumericalError naming the offending
/// frequency if a magnitude is not finite on the grid.
AlphaBound alpha_bound(const DiscreteTransferFunction& g, double c, int n, AlphaRule rule,
                       const FrequencyGrid& grid, double margin = 10.0);

/// Smallest omega where the unwrapped phase crosses -pi, bisection-refined to
/// a relative tolerance of 1e-6. A crossing exactly at the grid's upper end is
/// reported at that frequency.
std::optional<double> phase_crossover(const DiscreteTransferFunction& tf, const FrequencyGrid& grid);

/// Shorthand terms of the module condition at one frequency.
struct ModuleConditionTerms {
    double b = 0.0;        // cos(omega Ts)
    double c_prime = 0.0;  // C - 1
    double c_dprime = 0.0; // 2C - 1
    double kp_scaled = 0.0; // Kp * Ts
};

ModuleConditionTerms module_condition_terms(double c, double ts, double omega, double kp = 0.0);

/// Module condition at one frequency as a quadratic form in (Kp', Kd) with
/// Kp' = Kp*Ts: q11 Kp'^2 + 2 q12 Kp' Kd + q22 Kd^2 <= rhs. At omega = pi/Ts
/// the form degenerates to a slab between two parallel lines (determinant 0).
struct ModuleEllipse {
    double q11 = 0.0, q12 = 0.0, q22 = 0.0, rhs = 0.0;
    double omega = 0.0;
    double ts = 0.0;

    double lhs(double kp, double kd) const;
    bool contains(double kp, double kd) const { return lhs(kp, kd) < rhs; }
    double det() const { return q11 * q22 - q12 * q12; }
    bool degenerate() const;
    /// Bounding box (kp_max, kd_max) of the boundary; infinite when degenerate.
    std::pair<double, double> extent() const;
    /// Points (kp, kd) on the boundary; empty when degenerate.
    std::vector<std::pair<double, double>> boundary_points(int count) const;
};

ModuleEllipse module_ellipse(const DiscreteTransferFunction& g, double alpha, double c, double ts,
                             double omega);

enum class LineSide { above, below, non_binding };

/// Phase condition at one frequency as a straight line Kd = slope*Kp + intercept
/// (or the vertical line Kp = 0 when W = 1), oriented by probing the tangent
/// form of the phase inequality on both sides.
struct PhaseLine {
    double slope = 0.0;
    double intercept = -1.0;
    LineSide feasible = LineSide::non_binding;
    double w = 0.0;     // the W value the line was built from
    double omega = 0.0; // evaluation frequency
    double ts = 0.0;
    bool vertical = false; // W == 1: boundary is Kp = 0

    /// Half-plane membership; always true when the probe found the line
    /// non-binding at its frequency.
    bool satisfied(double kp, double kd) const;
};

PhaseLine phase_line(const DiscreteTransferFunction& g, double c, double ts, double omega);

enum class SimplifiedVariant { conservative, permissive };

/// Module condition with |G| replaced by its grid maximum (conservative) or by
/// |G| at the plant's own phase crossover omega_1 (permissive); the cosine
/// terms stay at omega_0.
ModuleEllipse simplified_module_bound(const DiscreteTransferFunction& g, double alpha, double c,
                                      double ts, SimplifiedVariant variant, const FrequencyGrid& grid);

/// Necessary half-plane 2(Kd + 1) > -Kp Ts (2C - 1), i.e. the controller must
/// add phase on its own.
PhaseLine simplified_phase_line(double c, double ts);

struct RegionSpec {
    double alpha = 0.0;
    double c = 1.0;
    double ts = 1.0;
    int n = 1;
};

struct RegionPoint {
    double kp = 0.0;
    double kd = 0.0;
    bool predicted = false;
    bool stable = false;
};

struct StabilityRegion {
    RegionSpec spec;
    ModuleEllipse ellipse;
    std::optional<PhaseLine> line; // first-order controllers only
    PhaseLine simplified_line;
    std::vector<RegionPoint> grid; // row-major, kp outer loop
    int resolution = 0;
    std::optional<double> omega0;
    std::optional<double> omega1;
    bool omega0_found = false; // false: module condition fell back to the
                               // grid-max-magnitude frequency
    std::size_t predicted_count() const;
    std::size_t stable_count() const;
    std::size_t predicted_and_stable_count() const;
};

/// Builds the full region: omega_0 of G/(C+(1-C)z^-1), module quadratic at
/// omega_0, phase line at omega_0/2 (n = 1; for n = 2 the prediction uses the
/// simplified half-plane instead), and classifies every grid point both by
/// predicted membership and by verified closed-loop stability.
StabilityRegion build_region(const DiscreteTransferFunction& g, const RegionSpec& spec,
                             std::pair<double, double> kp_range, std::pair<double, double> kd_range,
                             int resolution, const FrequencyGrid& grid);

enum class Criterion { iae };

struct SimSpec {
    std::vector<double> y_ref;
    bool servo = true;
    std::optional<std::pair<double, double>> u_limits;
};

/// Simulates every verified-stable grid configuration and returns the one
/// minimizing the criterion; exact ties break toward lower Kd, then lower Kp.
IpdConfig best_config_search(const StabilityRegion& region, const DiscreteTransferFunction& plant,
                             const SimSpec& sim_spec, Criterion criterion = Criterion::iae);

} // namespace mfcd
