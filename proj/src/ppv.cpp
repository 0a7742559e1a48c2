#include "phasekit/ppv.hpp"

#include "phasekit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace phasekit {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kCompareGrid = 512;

std::string num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace

std::string to_string(PpvSource source) {
    return source == PpvSource::from_prc ? "from_prc" : "adjoint";
}

PpvSource parse_ppv_source(const std::string& name) {
    if (name == "from_prc") return PpvSource::from_prc;
    if (name == "adjoint") return PpvSource::adjoint;
    fail(ErrorKind::argument, "unknown PPV source '" + name + "'");
}

double PpvCurve::max_abs() const {
    double m = 0.0;
    for (double g : gamma) m = std::max(m, std::abs(g));
    return m;
}

double PpvCurve::fit_residual() const {
    const double scale = max_abs();
    if (scale == 0.0 || gamma.empty()) return 0.0;
    double ss = 0.0;
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        const double r = fourier(theta[i]) - gamma[i];
        ss += r * r;
    }
    return std::sqrt(ss / static_cast<double>(gamma.size())) / scale;
}

PpvCurve PpvCurve::from_samples(LimitCycle lc, InjectionPort port, std::vector<double> theta,
                                std::vector<double> gamma, PpvSource source,
                                std::size_t harmonics) {
    require_argument(theta.size() == gamma.size(), "PPV samples: size mismatch");
    PpvCurve curve;
    curve.lc = std::move(lc);
    curve.port = port;
    curve.theta = std::move(theta);
    curve.gamma = std::move(gamma);
    curve.source = source;
    curve.fourier = FourierSeries::fit(curve.theta, curve.gamma, harmonics);
    const double residual = curve.fit_residual();
    if (residual > 0.02) {
        fail(ErrorKind::fit, "Fourier reconstruction RMS " + num(residual) +
                                 " of max|gamma| exceeds 0.02; raise the harmonic count");
    }
    return curve;
}

PpvCurve ppv_from_prc(const PrcCurve& curve, std::size_t harmonics) {
    const double q = curve.impulse.charge();
    require_argument(q != 0.0 && std::isfinite(q), "PRC to PPV conversion needs nonzero charge h*b");
    std::vector<double> theta, gamma;
    theta.reserve(curve.points.size());
    gamma.reserve(curve.points.size());
    for (const auto& p : curve.points) {
        theta.push_back(p.theta1);
        gamma.push_back(p.prc / (curve.impulse.h * curve.impulse.b * curve.lc.omega0));
    }
    return PpvCurve::from_samples(curve.lc, curve.impulse.port, std::move(theta), std::move(gamma),
                                  PpvSource::from_prc, harmonics);
}

AdjointSolution solve_adjoint(const OdeSystem& sys, const LimitCycle& lc,
                              const AdjointOptions& opts) {
    require_argument(lc.dim == sys.dim, "limit cycle does not belong to this system");
    require_argument(opts.min_periods >= 1 && opts.max_periods >= opts.min_periods,
                     "adjoint period bounds are inconsistent");
    const std::size_t n = sys.dim;
    const std::size_t grid = lc.grid_size;
    const auto steps = static_cast<std::size_t>(std::llround(lc.T0 / lc.step));
    const std::size_t substeps = std::max<std::size_t>(1, steps / grid);
    const std::size_t S = substeps * grid;
    const double h = lc.T0 / static_cast<double>(S);

    // Orbit and transposed Jacobians on the half-step grid j = 0..2S.
    std::vector<double> jt((2 * S + 1) * n * n);
    std::vector<double> fields(grid * n);
    {
        Stepper stepper(sys, lc.method);
        State x = lc.section_state();
        std::vector<double> jac(n * n);
        std::vector<double> f(n);
        for (std::size_t j = 0; j <= 2 * S; ++j) {
            sys.eval_jacobian(x, jac);
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t c = 0; c < n; ++c) jt[(j * n + r) * n + c] = jac[c * n + r];
            }
            if (j % (2 * substeps) == 0 && j / (2 * substeps) < grid) {
                sys.eval(x, f);
                std::copy(f.begin(), f.end(), fields.begin() + static_cast<std::ptrdiff_t>(j / (2 * substeps) * n));
            }
            if (j < 2 * S) advance(stepper, x, 1, 0.5 * h);
        }
    }

    // g(j, z) = -J(x_j)^T z
    const auto g = [&](std::size_t j, std::span<const double> z, std::span<double> out) {
        const double* m = jt.data() + j * n * n;
        for (std::size_t r = 0; r < n; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < n; ++c) s += m[r * n + c] * z[c];
            out[r] = -s;
        }
    };

    const std::span<const double> f0(fields.data(), n);
    State z(f0.begin(), f0.end());
    const double f0_sq = dot(f0, f0);
    require_argument(f0_sq > 0.0, "vector field vanishes on the section");
    for (double& v : z) v /= f0_sq;

    AdjointSolution sol;
    sol.z.assign(grid * n, 0.0);
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    State previous = z;
    for (int period = 1; period <= opts.max_periods; ++period) {
        // Backward sweep from t = T0 to t = 0; z(T0) = z(0) of the previous sweep.
        for (std::size_t i = S; i-- > 0;) {
            const std::size_t hi = 2 * i + 2, mid = 2 * i + 1, lo = 2 * i;
            g(hi, z, k1);
            for (std::size_t r = 0; r < n; ++r) tmp[r] = z[r] - 0.5 * h * k1[r];
            g(mid, tmp, k2);
            for (std::size_t r = 0; r < n; ++r) tmp[r] = z[r] - 0.5 * h * k2[r];
            g(mid, tmp, k3);
            for (std::size_t r = 0; r < n; ++r) tmp[r] = z[r] - h * k3[r];
            g(lo, tmp, k4);
            for (std::size_t r = 0; r < n; ++r) {
                z[r] -= h / 6.0 * (k1[r] + 2.0 * k2[r] + 2.0 * k3[r] + k4[r]);
            }
            if (i % substeps == 0) {
                std::copy(z.begin(), z.end(), sol.z.begin() + static_cast<std::ptrdiff_t>(i / substeps * n));
            }
        }
        const double zn = norm(z);
        if (!std::isfinite(zn) || zn > 1e150 || zn == 0.0) {
            fail(ErrorKind::non_hyperbolic,
                 "backward adjoint integration diverged; cycle may be non-hyperbolic or wrong");
        }
        const double scale = dot(z, f0);
        if (scale == 0.0 || !std::isfinite(scale)) {
            fail(ErrorKind::non_hyperbolic, "adjoint solution became orthogonal to the flow");
        }
        for (double& v : z) v /= scale;
        for (double& v : sol.z) v /= scale;

        double diff = 0.0;
        for (std::size_t r = 0; r < n; ++r) diff += (z[r] - previous[r]) * (z[r] - previous[r]);
        const double change = std::sqrt(diff) / norm(z);
        previous = z;
        sol.periods = period;
        if (period >= opts.min_periods && change < opts.periodic_tol) break;
        if (period == opts.max_periods) {
            fail(ErrorKind::non_hyperbolic, "adjoint solution not periodic after " +
                                                std::to_string(opts.max_periods) +
                                                " backward periods (last change " + num(change) + ")");
        }
    }

    sol.normalization.resize(grid);
    double worst = 0.0;
    for (std::size_t k = 0; k < grid; ++k) {
        sol.normalization[k] = dot(std::span<const double>(sol.z.data() + k * n, n),
                                   std::span<const double>(fields.data() + k * n, n));
        worst = std::max(worst, std::abs(sol.normalization[k] - 1.0));
    }
    if (worst > opts.normalization_tol) {
        fail(ErrorKind::orbit_accuracy, "adjoint normalization z.f varies by " + num(worst) +
                                            " over the cycle; use a smaller step");
    }
    return sol;
}

PpvCurve adjoint_ppv(const OdeSystem& sys, const LimitCycle& lc, const InjectionPort& port,
                     const AdjointOptions& opts) {
    port.validate(sys.dim);
    const AdjointSolution sol = solve_adjoint(sys, lc, opts);
    std::vector<double> theta(lc.grid_size), gamma(lc.grid_size);
    for (std::size_t k = 0; k < lc.grid_size; ++k) {
        theta[k] = lc.grid_theta(k);
        gamma[k] = sol.z[k * sys.dim + port.state_index] * port.gain;
    }
    return PpvCurve::from_samples(lc, port, std::move(theta), std::move(gamma), PpvSource::adjoint,
                                  opts.harmonics);
}

PpvComparison compare_ppv(const PpvCurve& a, const PpvCurve& b) {
    if (std::abs(a.lc.T0 - b.lc.T0) > 1e-6 * std::abs(b.lc.T0)) {
        fail(ErrorKind::incompatible_curves,
             "PPV curves belong to cycles with different periods (" + num(a.lc.T0) + " vs " +
                 num(b.lc.T0) + ")");
    }
    const auto grid = uniform_angles(kCompareGrid);
    std::vector<double> va(kCompareGrid), vb(kCompareGrid);
    double scale = 0.0, ss = 0.0, worst = 0.0;
    for (std::size_t i = 0; i < kCompareGrid; ++i) {
        va[i] = a.eval(grid[i]);
        vb[i] = b.eval(grid[i]);
        scale = std::max(scale, std::abs(vb[i]));
        const double d = va[i] - vb[i];
        ss += d * d;
        worst = std::max(worst, std::abs(d));
    }
    PpvComparison report;
    const double rms = std::sqrt(ss / static_cast<double>(kCompareGrid));
    if (scale > 0.0) {
        report.rms_rel = rms / scale;
        report.max_rel = worst / scale;
    } else if (rms > 0.0) {
        report.rms_rel = report.max_rel = std::numeric_limits<double>::infinity();
    }

    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < kCompareGrid; ++i) {
        ma += va[i];
        mb += vb[i];
    }
    ma /= static_cast<double>(kCompareGrid);
    mb /= static_cast<double>(kCompareGrid);
    const auto correlation = [&](std::size_t lag) {
        double c = 0.0;
        for (std::size_t i = 0; i < kCompareGrid; ++i) {
            c += (va[i] - ma) * (vb[(i + lag) % kCompareGrid] - mb);
        }
        return c;
    };
    std::size_t best_lag = 0;
    double best = correlation(0);
    for (std::size_t lag = 1; lag < kCompareGrid; ++lag) {
        const double c = correlation(lag);
        if (c > best + 1e-12 * std::abs(best)) {
            best = c;
            best_lag = lag;
        }
    }
    report.phase_lag = wrap_angle(kTwoPi * static_cast<double>(best_lag) /
                                  static_cast<double>(kCompareGrid));
    return report;
}

SinusoidalityReport sinusoidality_report(std::span<const double> gamma_samples,
                                         std::span<const double> output_samples,
                                         std::size_t harmonics) {
    const auto tg = uniform_angles(gamma_samples.size());
    const auto to = uniform_angles(output_samples.size());
    const auto gamma = FourierSeries::fit(tg, gamma_samples, harmonics);
    const auto output = FourierSeries::fit(to, output_samples, harmonics);

    SinusoidalityReport report;
    double higher = 0.0;
    for (std::size_t k = 2; k <= output.harmonics(); ++k) higher += output.harmonic_power(k);
    const double p1 = output.harmonic_power(1);
    report.output_thd = p1 > 0.0 ? std::sqrt(higher / p1) : 0.0;
    report.ppv_fundamental_fraction = gamma.fundamental_fraction();
    const double offset = wrap_angle(gamma.fundamental_phase() - output.fundamental_phase());
    report.offset_deg = std::abs(offset) * 180.0 / std::numbers::pi;
    return report;
}

SinusoidalityReport sinusoidality_report(const PpvCurve& ppv, const LimitCycle& lc) {
    require_argument(std::abs(ppv.lc.T0 - lc.T0) <= 1e-6 * lc.T0,
                     "PPV and limit cycle come from different runs");
    const auto output = lc.output_samples();
    const auto to = uniform_angles(output.size());
    const auto out_series = FourierSeries::fit(to, output, ppv.fourier.harmonics());

    SinusoidalityReport report;
    double higher = 0.0;
    for (std::size_t k = 2; k <= out_series.harmonics(); ++k) higher += out_series.harmonic_power(k);
    const double p1 = out_series.harmonic_power(1);
    report.output_thd = p1 > 0.0 ? std::sqrt(higher / p1) : 0.0;
    report.ppv_fundamental_fraction = ppv.fourier.fundamental_fraction();
    const double offset = wrap_angle(ppv.fourier.fundamental_phase() - out_series.fundamental_phase());
    report.offset_deg = std::abs(offset) * 180.0 / std::numbers::pi;
    return report;
}

}  // namespace phasekit
