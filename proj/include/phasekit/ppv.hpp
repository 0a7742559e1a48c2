#pragma once

// Perturbation projection vector (PPV): conversion from a measured PRC, an
// independent adjoint (backward-integration) computation, and comparisons.
//
// Gamma is stored as a time shift per unit injected charge (s/C); multiply
// by omega0 for the phase shift per unit charge (rad/C).

#include "phasekit/dynsys.hpp"
#include "phasekit/fourier.hpp"
#include "phasekit/limit_cycle.hpp"
#include "phasekit/models.hpp"
#include "phasekit/prc.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace phasekit {

enum class PpvSource { from_prc, adjoint };

[[nodiscard]] std::string to_string(PpvSource source);
[[nodiscard]] PpvSource parse_ppv_source(const std::string& name);

struct PpvCurve {
    LimitCycle lc;
    InjectionPort port;
    std::vector<double> theta;  // rad
    std::vector<double> gamma;  // s/C
    FourierSeries fourier;      // gamma(theta)
    PpvSource source = PpvSource::from_prc;

    [[nodiscard]] double eval(double th) const { return fourier(th); }
    [[nodiscard]] double max_abs() const;
    /// RMS of (fourier - samples) over the samples, relative to max|gamma|.
    [[nodiscard]] double fit_residual() const;

    /// Attaches a least-squares Fourier fit; throws a fit error when the
    /// reconstruction RMS exceeds 2% of max|gamma|.
    [[nodiscard]] static PpvCurve from_samples(LimitCycle lc, InjectionPort port,
                                               std::vector<double> theta,
                                               std::vector<double> gamma, PpvSource source,
                                               std::size_t harmonics = 16);
};

/// gamma(theta1) = prc(theta1) / (h * b * omega0).
[[nodiscard]] PpvCurve ppv_from_prc(const PrcCurve& curve, std::size_t harmonics = 16);

struct AdjointOptions {
    int min_periods = 10;
    int max_periods = 500;
    double periodic_tol = 1e-6;       // relative change of z(0) per backward period
    double normalization_tol = 1e-3;  // allowed relative variation of z . f over the cycle
    std::size_t harmonics = 16;
};

/// Periodic solution z of dz/dt = -J(x_s(t))^T z, integrated backward along the
/// stored cycle and normalized so z . f(x_s) = 1. Returns gamma = z[port] * gain
/// on the cycle's phase grid.
[[nodiscard]] PpvCurve adjoint_ppv(const OdeSystem& sys, const LimitCycle& lc,
                                   const InjectionPort& port, const AdjointOptions& opts = {});

struct AdjointSolution {
    std::vector<double> z;              // grid_size x dim
    std::vector<double> normalization;  // z . f at each grid point
    int periods = 0;                    // backward periods until periodic
};

/// The raw adjoint solution behind adjoint_ppv.
[[nodiscard]] AdjointSolution solve_adjoint(const OdeSystem& sys, const LimitCycle& lc,
                                            const AdjointOptions& opts = {});

struct PpvComparison {
    double rms_rel = 0.0;
    double max_rel = 0.0;
    double phase_lag = 0.0;  // rad, argmax of the circular cross-correlation
};

/// rms_rel = RMS(a - b) / max|b| on a common 512-point grid.
[[nodiscard]] PpvComparison compare_ppv(const PpvCurve& a, const PpvCurve& b);

struct SinusoidalityReport {
    double output_thd = 0.0;
    double ppv_fundamental_fraction = 0.0;
    double offset_deg = 0.0;  // fundamental phase difference, folded into [0, 180]
};

[[nodiscard]] SinusoidalityReport sinusoidality_report(const PpvCurve& ppv, const LimitCycle& lc);

/// Same analysis on raw uniform samples of one period each.
[[nodiscard]] SinusoidalityReport sinusoidality_report(std::span<const double> gamma_samples,
                                                       std::span<const double> output_samples,
                                                       std::size_t harmonics = 16);

}  // namespace phasekit
