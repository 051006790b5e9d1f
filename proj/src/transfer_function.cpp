#include "mfcd/transfer_function.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>
#include <nlohmann/json.hpp>

namespace mfcd {

namespace poly {

std::vector<double> trim(std::vector<double> a) {
    while (a.size() > 1 && a.back() == 0.0)
        a.pop_back();
    return a;
}

std::vector<double> mul(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            out[i + j] += a[i] * b[j];
    return out;
}

std::vector<double> addp(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(std::max(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
    return out;
}

std::vector<double> scale(const std::vector<double>& a, double s) {
    std::vector<double> out(a);
    for (double& c : out) c *= s;
    return out;
}

Complex eval_zinv(const std::vector<double>& ascending, Complex zinv) {
    Complex acc{0.0, 0.0};
    for (auto it = ascending.rbegin(); it != ascending.rend(); ++it)
        acc = acc * zinv + *it;
    return acc;
}

} // namespace poly

DiscreteTransferFunction::DiscreteTransferFunction(std::vector<double> num_, std::vector<double> den_, double ts_)
    : num(poly::trim(std::move(num_))), den(poly::trim(std::move(den_))), ts(ts_) {
    if (den.empty() || den[0] == 0.0)
        throw Error("transfer function denominator must be non-empty with a nonzero constant term");
    if (num.empty())
        num = {0.0};
    if (!(ts > 0.0))
        throw Error("transfer function sample time must be positive");
}

DiscreteTransferFunction DiscreteTransferFunction::constant(double gain, double ts) {
    return {{gain}, {1.0}, ts};
}

DiscreteTransferFunction DiscreteTransferFunction::delay(double ts) {
    return {{0.0, 1.0}, {1.0}, ts};
}

bool operator==(const DiscreteTransferFunction& a, const DiscreteTransferFunction& b) {
    return a.num == b.num && a.den == b.den && a.ts == b.ts;
}

FrequencyGrid::FrequencyGrid(double omega_min_, double omega_max_, int points_, GridSpacing spacing_)
    : omega_min(omega_min_), omega_max(omega_max_), points(points_), spacing(spacing_) {
    if (!(omega_min > 0.0) || !(omega_min < omega_max))
        throw Error("frequency grid requires 0 < omega_min < omega_max");
    if (points < 2)
        throw Error("frequency grid requires at least 2 points");
}

FrequencyGrid FrequencyGrid::log_default(double ts, int points) {
    const double pi = 3.14159265358979323846;
    return FrequencyGrid(2.0 * pi / (1e4 * ts), pi / ts, points, GridSpacing::logarithmic);
}

std::vector<double> FrequencyGrid::omegas() const {
    std::vector<double> w(static_cast<std::size_t>(points));
    const int n = points - 1;
    if (spacing == GridSpacing::linear) {
        for (int i = 0; i <= n; ++i)
            w[static_cast<std::size_t>(i)] = omega_min + (omega_max - omega_min) * static_cast<double>(i) / n;
    } else {
        const double la = std::log(omega_min), lb = std::log(omega_max);
        for (int i = 0; i <= n; ++i)
            w[static_cast<std::size_t>(i)] = std::exp(la + (lb - la) * static_cast<double>(i) / n);
    }
    w.front() = omega_min;
    w.back() = omega_max;
    return w;
}

Complex eval_freq(const DiscreteTransferFunction& tf, double omega) {
    const Complex zinv = std::exp(Complex{0.0, -omega * tf.ts});
    const Complex dv = poly::eval_zinv(tf.den, zinv);
    if (dv == Complex{0.0, 0.0})
        throw NumericalError("pole on the unit circle: denominator vanishes at omega = " + std::to_string(omega));
    return poly::eval_zinv(tf.num, zinv) / dv;
}

namespace {

Complex horner(const std::vector<double>& descending, Complex x) {
    Complex acc{0.0, 0.0};
    for (double c : descending)
        acc = acc * x + c;
    return acc;
}

Complex horner_deriv(const std::vector<double>& descending, Complex x) {
    Complex acc{0.0, 0.0};
    const std::size_t n = descending.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double k = static_cast<double>(n - 1 - i);
        acc = acc * x + k * descending[i];
    }
    return acc;
}

// Roots of c0 x^m + c1 x^{m-1} + ... + cm (descending coefficients, c0 != 0),
// companion-matrix eigenvalues with Newton polishing.
std::vector<Complex> roots_descending(std::vector<double> desc) {
    // strip leading zeros (reduce degree)
    std::size_t lead = 0;
    while (lead + 1 < desc.size() && desc[lead] == 0.0)
        ++lead;
    desc.erase(desc.begin(), desc.begin() + static_cast<std::ptrdiff_t>(lead));
    const std::size_t m = desc.size() - 1;
    if (m == 0)
        return {};

    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j)
        comp(0, static_cast<Eigen::Index>(j)) = -desc[j + 1] / desc[0];
    for (std::size_t i = 1; i < m; ++i)
        comp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;

    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw NumericalError("companion-matrix eigenvalue iteration did not converge");

    double cmax = 0.0;
    for (double c : desc) cmax = std::max(cmax, std::abs(c));

    std::vector<Complex> roots;
    roots.reserve(m);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(m); ++i) {
        Complex r = es.eigenvalues()(i);
        // Newton polish; keep the best iterate by residual
        Complex best = r;
        double best_res = std::abs(horner(desc, r));
        for (int it = 0; it < 25; ++it) {
            const Complex p = horner(desc, r);
            const Complex dp = horner_deriv(desc, r);
            if (dp == Complex{0.0, 0.0})
                break;
            const Complex step = p / dp;
            r -= step;
            const double res = std::abs(horner(desc, r));
            if (res < best_res) {
                best = r;
                best_res = res;
            }
            if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(r)))
                break;
        }
        const double scale = cmax * std::max(1.0, std::pow(std::abs(best), static_cast<double>(m)));
        if (!(best_res <= 1e-8 * scale)) {
            std::ostringstream os;
            os << "polynomial root residual " << best_res << " exceeds tolerance near z = ("
               << best.real() << ", " << best.imag() << ")";
            throw NumericalError(os.str());
        }
        roots.push_back(best);
    }
    return roots;
}

} // namespace

std::vector<Complex> poles(const DiscreteTransferFunction& tf) {
    // den in ascending z^-1 is the descending-coefficient polynomial in z
    return roots_descending(poly::trim(tf.den));
}

std::vector<Complex> polynomial_roots(const std::vector<double>& ascending) {
    std::vector<double> desc = poly::trim(ascending);
    std::reverse(desc.begin(), desc.end());
    return roots_descending(std::move(desc));
}

bool is_stable(const DiscreteTransferFunction& tf, double margin) {
    for (const Complex& p : poles(tf))
        if (!(std::abs(p) < 1.0 - margin))
            return false;
    return true;
}

namespace {

void check_ts(const DiscreteTransferFunction& a, const DiscreteTransferFunction& b) {
    if (a.ts != b.ts)
        throw SampleTimeMismatch(a.ts, b.ts);
}

DiscreteTransferFunction normalized(std::vector<double> num, std::vector<double> den, double ts) {
    den = poly::trim(std::move(den));
    if (den.empty() || den[0] == 0.0)
        throw Error("composition produced an improper transfer function (zero constant denominator term)");
    const double a0 = den[0];
    for (double& c : den) c /= a0;
    for (double& c : num) c /= a0;
    return {std::move(num), std::move(den), ts};
}

} // namespace

DiscreteTransferFunction series(const DiscreteTransferFunction& a, const DiscreteTransferFunction& b) {
    check_ts(a, b);
    return normalized(poly::mul(a.num, b.num), poly::mul(a.den, b.den), a.ts);
}

DiscreteTransferFunction add(const DiscreteTransferFunction& a, const DiscreteTransferFunction& b) {
    check_ts(a, b);
    return normalized(poly::addp(poly::mul(a.num, b.den), poly::mul(b.num, a.den)),
                      poly::mul(a.den, b.den), a.ts);
}

DiscreteTransferFunction feedback(const DiscreteTransferFunction& forward, const DiscreteTransferFunction& back) {
    check_ts(forward, back);
    return normalized(poly::mul(forward.num, back.den),
                      poly::addp(poly::mul(forward.den, back.den), poly::mul(forward.num, back.num)),
                      forward.ts);
}

DiscreteTransferFunction divide(const DiscreteTransferFunction& a, const DiscreteTransferFunction& b) {
    check_ts(a, b);
    if (poly::trim(b.num)[0] == 0.0 && poly::trim(b.num).size() == 1)
        throw Error("division by a zero transfer function");
    return normalized(poly::mul(a.num, b.den), poly::mul(a.den, b.num), a.ts);
}

namespace {

// Real polynomial (ascending in w = z^-1) from complex roots; conjugates must pair up.
std::vector<double> poly_from_roots(const std::vector<Complex>& roots, double lead) {
    std::vector<Complex> acc{Complex{1.0, 0.0}};
    for (const Complex& r : roots) {
        std::vector<Complex> next(acc.size() + 1, Complex{0.0, 0.0});
        for (std::size_t i = 0; i < acc.size(); ++i) {
            next[i] += acc[i] * (-r);
            next[i + 1] += acc[i];
        }
        acc = std::move(next);
    }
    double scale = 0.0, worst_imag = 0.0;
    for (const Complex& c : acc) {
        scale = std::max(scale, std::abs(c));
        worst_imag = std::max(worst_imag, std::abs(c.imag()));
    }
    if (worst_imag > 1e-9 * std::max(scale, 1e-300))
        throw NumericalError("cancellation broke a conjugate root pair; lower the tolerance");
    std::vector<double> out(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i)
        out[i] = acc[i].real() * lead;
    return out;
}

} // namespace

DiscreteTransferFunction minreal(const DiscreteTransferFunction& tf, double tol) {
    std::vector<Complex> zn = polynomial_roots(tf.num);
    std::vector<Complex> zd = polynomial_roots(tf.den);
    // roots here are in w = z^-1 space: ascending-coefficient polynomial in w
    // (polynomial_roots treats coefficients as ascending powers of its variable)
    std::vector<bool> keep_d(zd.size(), true);
    std::vector<Complex> kept_n;
    for (const Complex& r : zn) {
        bool cancelled = false;
        for (std::size_t j = 0; j < zd.size(); ++j) {
            if (keep_d[j] && std::abs(zd[j] - r) <= tol) {
                keep_d[j] = false;
                cancelled = true;
                break;
            }
        }
        if (!cancelled)
            kept_n.push_back(r);
    }
    std::vector<Complex> kept_d;
    for (std::size_t j = 0; j < zd.size(); ++j)
        if (keep_d[j])
            kept_d.push_back(zd[j]);

    const std::vector<double> ntrim = poly::trim(tf.num);
    const std::vector<double> dtrim = poly::trim(tf.den);
    return normalized(poly_from_roots(kept_n, ntrim.back()), poly_from_roots(kept_d, dtrim.back()), tf.ts);
}

DiscreteTransferFunction discretize(const ContinuousSecondOrder& sys, double ts, DiscretizationMethod method) {
    if (sys.a2 == 0.0)
        throw Error("discretize requires a genuine second-order plant (a2 != 0)");
    if (!(ts > 0.0))
        throw Error("discretize requires a positive sample time");

    if (method == DiscretizationMethod::tustin) {
        const double q = 2.0 / ts;
        const double c0 = sys.a2 * q * q + sys.a1 * q + sys.a0;
        const double c1 = -2.0 * sys.a2 * q * q + 2.0 * sys.a0;
        const double c2 = sys.a2 * q * q - sys.a1 * q + sys.a0;
        return normalized({sys.k, 2.0 * sys.k, sys.k}, {c0, c1, c2}, ts);
    }

    // state space x = [y, y']: x' = A x + B u, y = [1 0] x
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    m(0, 1) = 1.0;
    m(1, 0) = -sys.a0 / sys.a2;
    m(1, 1) = -sys.a1 / sys.a2;
    m(1, 2) = sys.k / sys.a2;
    const Eigen::Matrix3d e = (m * ts).exp();
    const double ad00 = e(0, 0), ad01 = e(0, 1), ad10 = e(1, 0), ad11 = e(1, 1);
    const double bd0 = e(0, 2), bd1 = e(1, 2);

    const double tr = ad00 + ad11;
    const double det = ad00 * ad11 - ad01 * ad10;
    // C (zI - Ad)^-1 Bd with C = [1 0]
    return normalized({0.0, bd0, ad01 * bd1 - ad11 * bd0}, {1.0, -tr, det}, ts);
}

std::string to_json(const DiscreteTransferFunction& tf) {
    nlohmann::json j;
    j["num"] = tf.num;
    j["den"] = tf.den;
    j["ts"] = tf.ts;
    return j.dump();
}

DiscreteTransferFunction tf_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    return {j.at("num").get<std::vector<double>>(), j.at("den").get<std::vector<double>>(),
            j.at("ts").get<double>()};
}

} // namespace mfcd
