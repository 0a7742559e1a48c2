#include "phasekit/fourier.hpp"

#include "phasekit/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace phasekit {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double FourierSeries::operator()(double theta) const {
    const double t = theta - kTwoPi * std::floor(theta / kTwoPi);
    const double c1 = std::cos(t);
    const double s1 = std::sin(t);
    double ck = c1;
    double sk = s1;
    double sum = a0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        sum += a[k] * ck + b[k] * sk;
        const double cn = ck * c1 - sk * s1;
        sk = sk * c1 + ck * s1;
        ck = cn;
    }
    return sum;
}

double FourierSeries::harmonic_power(std::size_t k) const {
    require_argument(k >= 1 && k <= a.size(), "harmonic index out of range");
    return a[k - 1] * a[k - 1] + b[k - 1] * b[k - 1];
}

double FourierSeries::fundamental_fraction() const {
    if (a.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t k = 1; k <= a.size(); ++k) total += harmonic_power(k);
    if (total == 0.0) return 1.0;
    return harmonic_power(1) / total;
}

double FourierSeries::fundamental_phase() const {
    require_argument(!a.empty(), "series has no fundamental");
    return std::atan2(b[0], a[0]);
}

double FourierSeries::fundamental_amplitude() const {
    return a.empty() ? 0.0 : std::sqrt(harmonic_power(1));
}

FourierSeries FourierSeries::scaled(double factor) const {
    FourierSeries out = *this;
    out.a0 *= factor;
    for (double& v : out.a) v *= factor;
    for (double& v : out.b) v *= factor;
    return out;
}

FourierSeries FourierSeries::fit(std::span<const double> theta, std::span<const double> values,
                                 std::size_t harmonics) {
    require_argument(theta.size() == values.size(), "fourier fit: size mismatch");
    require_argument(!theta.empty(), "fourier fit: no samples");
    const std::size_t n = theta.size();
    const std::size_t K = std::min(harmonics, (n - 1) / 2);
    const auto cols = static_cast<Eigen::Index>(2 * K + 1);

    Eigen::MatrixXd design(static_cast<Eigen::Index>(n), cols);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        design(r, 0) = 1.0;
        for (std::size_t k = 1; k <= K; ++k) {
            const double arg = static_cast<double>(k) * theta[i];
            design(r, static_cast<Eigen::Index>(2 * k - 1)) = std::cos(arg);
            design(r, static_cast<Eigen::Index>(2 * k)) = std::sin(arg);
        }
        rhs(r) = values[i];
    }
    const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(rhs);

    FourierSeries out;
    out.a0 = coef(0);
    out.a.resize(K);
    out.b.resize(K);
    for (std::size_t k = 1; k <= K; ++k) {
        out.a[k - 1] = coef(static_cast<Eigen::Index>(2 * k - 1));
        out.b[k - 1] = coef(static_cast<Eigen::Index>(2 * k));
    }
    return out;
}

std::vector<double> uniform_angles(std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        out[k] = kTwoPi * static_cast<double>(k) / static_cast<double>(n);
    }
    return out;
}

}  // namespace phasekit
