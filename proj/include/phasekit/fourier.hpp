#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace phasekit {

/// Truncated real Fourier series in a 2*pi-periodic angle:
///   f(theta) = a0 + sum_{k=1..K} a_k cos(k theta) + b_k sin(k theta)
struct FourierSeries {
    double a0 = 0.0;
    std::vector<double> a;  // a[k-1] = a_k
    std::vector<double> b;  // b[k-1] = b_k

    [[nodiscard]] std::size_t harmonics() const noexcept { return a.size(); }
    [[nodiscard]] double operator()(double theta) const;

    /// a_k^2 + b_k^2 for k >= 1.
    [[nodiscard]] double harmonic_power(std::size_t k) const;
    /// Share of the non-DC power carried by the first harmonic; 1 when the
    /// series has no AC content at all.
    [[nodiscard]] double fundamental_fraction() const;
    /// phi in a1 cos(theta) + b1 sin(theta) = R cos(theta - phi).
    [[nodiscard]] double fundamental_phase() const;
    [[nodiscard]] double fundamental_amplitude() const;

    [[nodiscard]] FourierSeries scaled(double factor) const;

    /// Least-squares fit on arbitrary sample angles. K is clamped so the
    /// system stays overdetermined: K <= (n - 1) / 2.
    [[nodiscard]] static FourierSeries fit(std::span<const double> theta,
                                           std::span<const double> values, std::size_t harmonics);
};

/// Samples on theta_k = 2*pi*k/n, k = 0..n-1.
[[nodiscard]] std::vector<double> uniform_angles(std::size_t n);

}  // namespace phasekit
