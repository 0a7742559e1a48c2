#include "phasekit/prc.hpp"

#include "phasekit/errors.hpp"
#include "phasekit/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace phasekit {

namespace {

std::string num(double v) {
    std::ostringstream os;
    os.precision(9);
    os << v;
    return os.str();
}

// Shares one free-running reference run across every injection time.
class PrcMeasurer {
public:
    PrcMeasurer(const OdeSystem& sys, const LimitCycle& lc, const ImpulseSpec& impulse, double step,
                const PrcOptions& opts)
        : sys_(sys), lc_(lc), impulse_(impulse), step_(step), opts_(opts) {
        impulse_.validate(sys.dim);
        require_argument(opts.discard_periods >= 0, "discard periods must be >= 0");
        horizon_ = lc.T0 * static_cast<double>(opts.discard_periods + opts.crossings + 3);
        free_ = integrate(sys, lc.section_state(), 0.0, horizon_, step_, lc.method);
        free_crossings_ = crossing_times(free_, lc.ref_state_index, lc.ref_level, Direction::rising);
    }

    double measure(double t1) const {
        require_argument(t1 >= 0.0 && t1 < lc_.T0 * (1.0 + 1e-12), "t1 must lie in [0, T0)");
        const auto k1 = static_cast<std::size_t>(std::llround(t1 / step_));
        const double t_inj = static_cast<double>(k1) * step_;
        State x0(free_.row(k1).begin(), free_.row(k1).end());

        // No charge leaves the trajectory equal to the free run.
        if (impulse_.charge() == 0.0) return 0.0;

        Trajectory perturbed;
        if (impulse_.mode == ImpulseMode::state_jump) {
            x0[impulse_.port.state_index] += impulse_.charge() * impulse_.port.gain;
            perturbed = integrate(sys_, x0, t_inj, horizon_, step_, lc_.method);
        } else {
            const RectPulse pulse{t_inj, impulse_.h, impulse_.port.state_index,
                                  impulse_.b * impulse_.port.gain};
            perturbed = integrate(sys_, x0, t_inj, horizon_, step_, lc_.method, {},
                                  std::span<const RectPulse>(&pulse, 1));
        }
        const auto cp =
            crossing_times(perturbed, lc_.ref_state_index, lc_.ref_level, Direction::rising);
        const double shift = asymptotic_phase_shift(
            free_crossings_, cp, t_inj + opts_.discard_periods * lc_.T0, lc_,
            {opts_.crossings, opts_.period_tol});
        if (opts_.weak_mode && std::abs(shift) > 0.5 * std::numbers::pi) {
            fail(ErrorKind::too_strong_impulse,
                 "measured phase shift " + num(shift) + " rad exceeds pi/2 at t1 = " + num(t1));
        }
        return shift;
    }

private:
    const OdeSystem& sys_;
    const LimitCycle& lc_;
    ImpulseSpec impulse_;
    double step_;
    PrcOptions opts_;
    double horizon_ = 0.0;
    Trajectory free_;
    std::vector<double> free_crossings_;
};

}  // namespace

ImpulseMode parse_impulse_mode(const std::string& name) {
    if (name == "state_jump") return ImpulseMode::state_jump;
    if (name == "rect_pulse") return ImpulseMode::rect_pulse;
    fail(ErrorKind::argument, "unknown impulse mode '" + name + "'");
}

std::string to_string(ImpulseMode mode) {
    return mode == ImpulseMode::state_jump ? "state_jump" : "rect_pulse";
}

void ImpulseSpec::validate(std::size_t dim) const {
    require_argument(std::isfinite(h) && h > 0.0, "impulse width h must be > 0");
    require_argument(std::isfinite(b), "impulse peak b must be finite");
    port.validate(dim);
}

double PrcCurve::max_abs() const {
    double m = 0.0;
    for (const auto& p : points) m = std::max(m, std::abs(p.prc));
    return m;
}

double measure_prc_point(const OdeSystem& sys, const LimitCycle& lc, const ImpulseSpec& impulse,
                         double t1, const PrcOptions& opts) {
    const PrcMeasurer measurer(sys, lc, impulse, lc.step, opts);
    return measurer.measure(t1);
}

PrcCurve sweep_prc(const OdeSystem& sys, const LimitCycle& lc, const ImpulseSpec& impulse,
                   std::size_t n_points, const PrcOptions& opts) {
    require_argument(n_points >= 4, "PRC sweep needs at least 4 points");
    const std::size_t per_point =
        std::max<std::size_t>(1, (opts.steps_per_period + n_points - 1) / n_points);
    const double step = lc.T0 / static_cast<double>(per_point * n_points);
    const PrcMeasurer measurer(sys, lc, impulse, step, opts);

    PrcCurve curve;
    curve.lc = lc;
    curve.impulse = impulse;
    curve.points.resize(n_points);
    const std::size_t threads = opts.threads > 0 ? opts.threads : sweep_threads();
    parallel_for(n_points, threads, [&](std::size_t k) {
        const double t1 = lc.T0 * static_cast<double>(k) / static_cast<double>(n_points);
        try {
            curve.points[k] = {t1, lc.omega0 * t1, measurer.measure(t1)};
        } catch (const Error& e) {
            throw Error(e.kind(), e.detail() + " [sweep point t1 = " + num(t1) + " s]");
        }
    });
    return curve;
}

WeaknessReport linearity_report(const PrcCurve& full, const PrcCurve& half, double rel_tol) {
    require_argument(full.points.size() == half.points.size(), "linearity: curve sizes differ");
    const double scale = full.max_abs();
    WeaknessReport report;
    if (scale == 0.0) return report;
    double worst = 0.0;
    for (std::size_t i = 0; i < full.points.size(); ++i) {
        worst = std::max(worst, std::abs(full.points[i].prc - 2.0 * half.points[i].prc));
    }
    report.deviation = worst / scale;
    report.linear = report.deviation <= rel_tol;
    return report;
}

WeaknessReport weakness_check(const OdeSystem& sys, const PrcCurve& curve, const PrcOptions& opts,
                              double rel_tol) {
    if (curve.max_abs() == 0.0) return {};
    ImpulseSpec half = curve.impulse;
    half.b *= 0.5;
    const PrcCurve half_curve = sweep_prc(sys, curve.lc, half, curve.points.size(), opts);
    return linearity_report(curve, half_curve, rel_tol);
}

double auto_charge(const OdeSystem& sys, const LimitCycle& lc, const InjectionPort& port,
                   double width, const PrcOptions& opts, double target_rad) {
    require_argument(target_rad > 0.0 && target_rad < 0.5 * std::numbers::pi,
                     "target phase shift must lie in (0, pi/2)");
    port.validate(sys.dim);
    double lo = lc.orbit_row(0)[port.state_index];
    double hi = lo;
    for (std::size_t k = 0; k < lc.grid_size; ++k) {
        lo = std::min(lo, lc.orbit_row(k)[port.state_index]);
        hi = std::max(hi, lc.orbit_row(k)[port.state_index]);
    }
    double q = 1e-3 * (hi - lo) / std::abs(port.gain);
    for (int probe = 0; probe < 2; ++probe) {
        const ImpulseSpec spec{width, q / width, port, ImpulseMode::state_jump};
        const double response = sweep_prc(sys, lc, spec, 8, opts).max_abs();
        if (response == 0.0) {
            fail(ErrorKind::argument, "injection port shows no phase response");
        }
        q *= target_rad / response;
    }
    return q;
}

}  // namespace phasekit
