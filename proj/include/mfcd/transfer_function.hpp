#pragma once

// Discrete rational transfer functions in powers of z^-1 with a fixed sample
// time, plus the frequency-domain and root-finding operations the design
// method needs. All types are immutable values; operations are pure.

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mfcd/errors.hpp"

namespace mfcd {

using Complex = std::complex<double>;

/// Rational function b0 + b1 z^-1 + ... over a0 + a1 z^-1 + ..., sampled at ts.
struct DiscreteTransferFunction {
    std::vector<double> num; // ascending powers of z^-1
    std::vector<double> den; // ascending powers of z^-1, den[0] != 0
    double ts = 0.0;         // seconds, > 0

    DiscreteTransferFunction() = default;
    DiscreteTransferFunction(std::vector<double> num_, std::vector<double> den_, double ts_);

    /// Constant gain as a transfer function.
    static DiscreteTransferFunction constant(double gain, double ts);
    /// Unit delay z^-1.
    static DiscreteTransferFunction delay(double ts);

    double nyquist() const { return 3.14159265358979323846 / ts; }
};

bool operator==(const DiscreteTransferFunction& a, const DiscreteTransferFunction& b);

/// Continuous plant k / (a2 s^2 + a1 s + a0), a2 != 0.
struct ContinuousSecondOrder {
    double a2 = 0.0;
    double a1 = 0.0;
    double a0 = 0.0;
    double k = 0.0;
};

enum class DiscretizationMethod { zoh, tustin };

enum class GridSpacing { linear, logarithmic };

/// Evaluation frequencies for magnitude/phase sweeps, 0 < omega_min < omega_max <= pi/ts.
struct FrequencyGrid {
    double omega_min = 0.0;
    double omega_max = 0.0;
    int points = 0;
    GridSpacing spacing = GridSpacing::logarithmic;

    FrequencyGrid(double omega_min_, double omega_max_, int points_, GridSpacing spacing_);

    /// Default sweep: logarithmic, 4096 points, from 2*pi/(1e4*ts) up to the
    /// Nyquist frequency pi/ts. The low cutoff is a visible parameter because
    /// plants with integrator behaviour have unbounded magnitude as omega -> 0.
    static FrequencyGrid log_default(double ts, int points = 4096);

    std::vector<double> omegas() const;
};

/// Value of the rational function at z = e^{i omega ts}.
Complex eval_freq(const DiscreteTransferFunction& tf, double omega);

/// Roots of the denominator polynomial in z (not z^-1), via companion-matrix
/// eigenvalues polished by Newton steps. Residuals of the monic polynomial are
/// checked against 1e-8 (relative to the largest coefficient); a violation
/// throws NumericalError carrying the offending iterate.
std::vector<Complex> poles(const DiscreteTransferFunction& tf);

/// Roots of an ascending-coefficient polynomial c0 + c1 x + ... (same machinery).
std::vector<Complex> polynomial_roots(const std::vector<double>& ascending);

/// True iff every pole modulus is below 1 - margin.
bool is_stable(const DiscreteTransferFunction& tf, double margin = 1e-9);

DiscreteTransferFunction series(const DiscreteTransferFunction& a, const DiscreteTransferFunction& b);
DiscreteTransferFunction add(const DiscreteTransferFunction& a, const DiscreteTransferFunction& b);
/// forward / (1 + forward * back); no pole-zero cancellation is performed.
DiscreteTransferFunction feedback(const DiscreteTransferFunction& forward, const DiscreteTransferFunction& back);
/// a / b; requires b's numerator to have a nonzero constant coefficient.
DiscreteTransferFunction divide(const DiscreteTransferFunction& a, const DiscreteTransferFunction& b);

/// Cancel common num/den roots closer than tol (the only place cancellation happens).
DiscreteTransferFunction minreal(const DiscreteTransferFunction& tf, double tol = 1e-7);

/// Zero-order-hold (default) or Tustin equivalent of a second-order continuous
/// plant. ZOH preserves the DC gain k/a0 exactly when a0 != 0.
DiscreteTransferFunction discretize(const ContinuousSecondOrder& sys, double ts,
                                    DiscretizationMethod method = DiscretizationMethod::zoh);

std::string to_json(const DiscreteTransferFunction& tf);
DiscreteTransferFunction tf_from_json(const std::string& text);

namespace poly {
std::vector<double> mul(const std::vector<double>& a, const std::vector<double>& b);
std::vector<double> addp(const std::vector<double>& a, const std::vector<double>& b);
std::vector<double> scale(const std::vector<double>& a, double s);
std::vector<double> trim(std::vector<double> a);
Complex eval_zinv(const std::vector<double>& ascending, Complex zinv);
} // namespace poly

} // namespace mfcd
