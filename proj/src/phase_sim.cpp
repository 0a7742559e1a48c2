#include "phasekit/phase_sim.hpp"

#include "phasekit/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace phasekit {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double wrap_deg(double rad) {
    return wrap_angle(rad) * 180.0 / std::numbers::pi;
}

double positive_mod(double x, double m) {
    double r = std::fmod(x, m);
    if (r < 0.0) r += m;
    return r;
}

void check_resolution(double dt, double T0) {
    require_argument(dt > 0.0, "phase step must be > 0");
    require_argument(dt <= T0 / 200.0 * (1.0 + 1e-12),
                     "phase step " + num(dt) + " s exceeds T0/200 = " + num(T0 / 200.0) + " s");
}

}  // namespace

PhaseOscillator PhaseOscillator::from_ppv(PpvCurve ppv, double alpha) {
    PhaseOscillator osc;
    osc.omega0 = ppv.lc.omega0;
    osc.gamma = std::move(ppv);
    osc.alpha = alpha;
    return osc;
}

double PhaseOscillator::T0() const noexcept {
    return kTwoPi / omega0;
}

double PhaseOscillator::phase(double t) const {
    return positive_mod(omega0 * (t + alpha), kTwoPi);
}

double PhaseOscillator::output(double t, double alpha_now) const {
    return gamma.lc.output_at(omega0 * (t + alpha_now));
}

void PhaseOscillator::validate() const {
    require_argument(std::isfinite(omega0) && omega0 > 0.0, "oscillator omega0 must be > 0");
    require_argument(std::abs(gamma.lc.omega0 - omega0) <= 1e-9 * omega0,
                     "oscillator omega0 differs from its PPV cycle");
    require_argument(std::isfinite(alpha), "oscillator alpha must be finite");
}

double phase_step(const PhaseOscillator& osc, const Waveform& b, double t, double dt) {
    check_resolution(dt, osc.T0());
    const auto rate = [&](double tt, double a) {
        const double current = b ? b(tt) : 0.0;
        if (!std::isfinite(current)) {
            fail(ErrorKind::argument, "non-finite injection current at t = " + num(tt) + " s");
        }
        if (current == 0.0) return 0.0;
        return osc.gamma.eval(osc.omega0 * (tt + a)) * current;
    };
    const double a = osc.alpha;
    const double k1 = rate(t, a);
    const double k2 = rate(t + 0.5 * dt, a + 0.5 * dt * k1);
    const double k3 = rate(t + 0.5 * dt, a + 0.5 * dt * k2);
    const double k4 = rate(t + dt, a + dt * k3);
    return a + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double adler_lock_range(const PpvCurve& gamma, double amp) {
    const auto& f = gamma.fourier;
    const double c1 = f.harmonics() > 0 ? std::hypot(f.a[0], f.b[0]) : 0.0;
    return 0.5 * gamma.lc.omega0 * std::abs(amp) * c1;
}

LockReport injection_lock(const PhaseOscillator& osc, double amp, double w_inj, int horizon_periods,
                          const LockOptions& opts) {
    osc.validate();
    require_argument(w_inj > 0.0, "injection frequency must be > 0");
    require_argument(std::isfinite(amp), "injection amplitude must be finite");
    require_argument(opts.window_cycles >= 2, "lock window must span at least 2 cycles");
    require_argument(horizon_periods > 0 && static_cast<std::size_t>(horizon_periods) > 2 * opts.window_cycles,
                     "horizon must exceed twice the lock window");

    const double T_inj = kTwoPi / w_inj;
    const auto min_steps = static_cast<std::size_t>(std::ceil(200.0 * T_inj / osc.T0()));
    const std::size_t per_cycle = std::max(opts.steps_per_cycle, min_steps);
    const double dt = T_inj / static_cast<double>(per_cycle);
    const Waveform b = [amp, w_inj](double t) { return amp * std::cos(w_inj * t); };

    const auto cycles = static_cast<std::size_t>(horizon_periods);
    std::vector<double> alpha_at(cycles + 1);
    PhaseOscillator cur = osc;
    alpha_at[0] = cur.alpha;
    for (std::size_t c = 0; c < cycles; ++c) {
        const double t0 = static_cast<double>(c) * T_inj;
        for (std::size_t s = 0; s < per_cycle; ++s) {
            cur.alpha = phase_step(cur, b, t0 + static_cast<double>(s) * dt, dt);
        }
        alpha_at[c + 1] = cur.alpha;
    }

    LockReport report;
    double worst = 0.0;
    for (std::size_t c = cycles - opts.window_cycles; c < cycles; ++c) {
        const double freq = osc.omega0 * (T_inj + alpha_at[c + 1] - alpha_at[c]) / T_inj;
        worst = std::max(worst, std::abs(freq - w_inj) / w_inj);
    }
    report.window_freq_error = worst;
    const std::size_t w0 = cycles - opts.window_cycles;
    report.mean_freq = osc.omega0 * (1.0 + (alpha_at[cycles] - alpha_at[w0]) /
                                               (static_cast<double>(opts.window_cycles) * T_inj));
    report.locked = worst < opts.freq_tol;
    const double t_end = static_cast<double>(cycles) * T_inj;
    if (report.locked) {
        const double psi = osc.omega0 * (t_end + alpha_at[cycles]) - w_inj * t_end;
        report.steady_phase_deg = wrap_deg(psi);
    } else {
        // Secular slope of the relative phase over the second half of the run.
        const std::size_t mid = cycles / 2;
        const double t_mid = static_cast<double>(mid) * T_inj;
        const double psi_end = osc.omega0 * (t_end + alpha_at[cycles]) - w_inj * t_end;
        const double psi_mid = osc.omega0 * (t_mid + alpha_at[mid]) - w_inj * t_mid;
        report.beat_freq = std::abs(psi_end - psi_mid) / (t_end - t_mid);
    }
    return report;
}

CouplingKernel linear_kernel(double gain) {
    return [gain](double v) { return gain * v; };
}

void PhaseNetwork::validate() const {
    require_argument(!oscillators.empty(), "network has no oscillators");
    for (const auto& osc : oscillators) osc.validate();
    const std::size_t n = oscillators.size();
    for (std::size_t k = 0; k < injections.size(); ++k) {
        require_argument(injections[k].target < n,
                         "injection " + std::to_string(k) + " targets a missing oscillator");
        require_argument(static_cast<bool>(injections[k].current),
                         "injection " + std::to_string(k) + " has no waveform");
    }
    for (std::size_t k = 0; k < couplings.size(); ++k) {
        const auto& c = couplings[k];
        require_argument(c.from < n && c.to < n,
                         "coupling " + std::to_string(k) + " references a missing oscillator");
        require_argument(static_cast<bool>(c.kernel), "coupling " + std::to_string(k) + " has no kernel");
    }
}

double PhaseNetwork::default_dt() const {
    double dt = std::numeric_limits<double>::infinity();
    for (const auto& osc : oscillators) dt = std::min(dt, osc.T0() / 500.0);
    return dt;
}

void PhaseNetwork::add_diffusive(std::size_t from, std::size_t to, double gain) {
    couplings.push_back({from, to, linear_kernel(gain), gain});
    couplings.push_back({to, to, linear_kernel(-gain), -gain});
}

namespace {

// Gamma tabulated on a dense uniform phase grid. With 16 harmonics the
// linear-interpolation error stays below 1e-4 of max|gamma|.
class GammaTable {
public:
    static constexpr std::size_t kSize = 4096;

    explicit GammaTable(const PpvCurve& gamma) : values_(kSize + 1) {
        for (std::size_t k = 0; k < kSize; ++k) {
            values_[k] = gamma.eval(kTwoPi * static_cast<double>(k) / static_cast<double>(kSize));
        }
        values_[kSize] = values_[0];
    }

    [[nodiscard]] double operator()(double theta) const {
        constexpr double n = static_cast<double>(kSize);
        double u = theta * (n / kTwoPi);
        u -= n * std::floor(u / n);
        auto k = static_cast<std::size_t>(u);
        if (k >= kSize) k = 0;
        const double frac = u - static_cast<double>(k);
        return values_[k] + frac * (values_[k + 1] - values_[k]);
    }

private:
    std::vector<double> values_;
};

// Shared right-hand side of the network alpha equations.
class NetworkRhs {
public:
    explicit NetworkRhs(const PhaseNetwork& net)
        : net_(&net), outputs_(net.oscillators.size()), currents_(net.oscillators.size()) {
        tables_.reserve(net.oscillators.size());
        for (const auto& osc : net.oscillators) tables_.emplace_back(osc.gamma);
    }

    void operator()(double t, std::span<const double> alpha, std::span<double> out) {
        const auto& oscs = net_->oscillators;
        const std::size_t n = oscs.size();
        for (std::size_t i = 0; i < n; ++i) {
            outputs_[i] = oscs[i].output(t, alpha[i]);
            currents_[i] = 0.0;
        }
        for (std::size_t k = 0; k < net_->injections.size(); ++k) {
            const auto& inj = net_->injections[k];
            const double c = inj.current(t);
            if (!std::isfinite(c)) {
                fail(ErrorKind::argument, "non-finite current from injection " + std::to_string(k) +
                                              " at t = " + num(t) + " s");
            }
            currents_[inj.target] += c;
        }
        for (std::size_t k = 0; k < net_->couplings.size(); ++k) {
            const auto& cp = net_->couplings[k];
            const double c = cp.kernel(outputs_[cp.from]);
            if (!std::isfinite(c)) {
                fail(ErrorKind::argument, "non-finite current on coupling " + std::to_string(k) + " (" +
                                              std::to_string(cp.from) + " -> " + std::to_string(cp.to) +
                                              ") at t = " + num(t) + " s");
            }
            currents_[cp.to] += c;
        }
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = currents_[i] == 0.0
                         ? 0.0
                         : tables_[i](oscs[i].omega0 * (t + alpha[i])) * currents_[i];
        }
    }

private:
    const PhaseNetwork* net_;
    std::vector<GammaTable> tables_;
    std::vector<double> outputs_;
    std::vector<double> currents_;
};

}  // namespace

PhaseTrace simulate_network(const PhaseNetwork& net, double t_end, double dt,
                            std::size_t record_every) {
    net.validate();
    require_argument(t_end > 0.0, "t_end must be > 0");
    require_argument(record_every >= 1, "record interval must be >= 1");
    for (const auto& osc : net.oscillators) check_resolution(dt, osc.T0());

    const std::size_t n = net.oscillators.size();
    const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
    const double h = t_end / static_cast<double>(steps);

    std::vector<double> alpha(n), k1(n), k2(n), k3(n), k4(n), tmp(n);
    for (std::size_t i = 0; i < n; ++i) alpha[i] = net.oscillators[i].alpha;
    NetworkRhs rhs(net);

    PhaseTrace trace;
    trace.count = n;
    const auto record = [&](double t) {
        trace.times.push_back(t);
        for (std::size_t i = 0; i < n; ++i) {
            trace.alphas.push_back(alpha[i]);
            trace.phases.push_back(positive_mod(net.oscillators[i].omega0 * (t + alpha[i]), kTwoPi));
        }
    };
    record(0.0);
    for (std::size_t s = 0; s < steps; ++s) {
        const double t = static_cast<double>(s) * h;
        rhs(t, alpha, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = alpha[i] + 0.5 * h * k1[i];
        rhs(t + 0.5 * h, tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = alpha[i] + 0.5 * h * k2[i];
        rhs(t + 0.5 * h, tmp, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = alpha[i] + h * k3[i];
        rhs(t + h, tmp, k4);
        for (std::size_t i = 0; i < n; ++i) {
            alpha[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if ((s + 1) % record_every == 0 || s + 1 == steps) {
            record(static_cast<double>(s + 1) * h);
        }
    }
    return trace;
}

CosimReport cosim_compare(const PhaseNetwork& net, std::span<const FullOscillator> full, double t_end,
                          const CosimOptions& opts) {
    net.validate();
    const std::size_t n = net.oscillators.size();
    require_argument(full.size() == n, "full-model list does not match the network size");
    require_argument(opts.steps_per_period >= 200, "full-model steps per period must be >= 200");
    for (std::size_t i = 0; i < n; ++i) {
        const auto& f = full[i];
        f.port.validate(f.sys.dim);
        if (std::abs(f.lc.T0 - net.oscillators[i].T0()) > 1e-6 * f.lc.T0) {
            fail(ErrorKind::incompatible_curves,
                 "oscillator " + std::to_string(i) + ": full-model period differs from the phase model");
        }
    }

    CosimReport report;

    auto start = std::chrono::steady_clock::now();
    // Fifty alpha samples per period are plenty for interpolation.
    const PhaseTrace trace = simulate_network(net, t_end, net.default_dt(), 10);
    report.phase_seconds = seconds_since(start);

    // Coupled full ODE with a trailing clock state for the injection waveforms.
    std::vector<std::size_t> offset(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) offset[i + 1] = offset[i] + full[i].sys.dim;
    const std::size_t clock = offset[n];
    OdeSystem coupled;
    coupled.dim = clock + 1;
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& name : full[i].sys.state_names) {
            coupled.state_names.push_back(name + "_" + std::to_string(i));
        }
    }
    coupled.state_names.push_back("t");
    coupled.field = [&net, full, offset, clock, n,
                     currents = std::vector<double>(n)](std::span<const double> x,
                                                        std::span<double> dxdt) mutable {
        const double t = x[clock];
        std::fill(currents.begin(), currents.end(), 0.0);
        for (const auto& inj : net.injections) currents[inj.target] += inj.current(t);
        for (const auto& cp : net.couplings) {
            currents[cp.to] += cp.kernel(x[offset[cp.from] + full[cp.from].lc.ref_state_index]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            full[i].sys.eval(x.subspan(offset[i], full[i].sys.dim), dxdt.subspan(offset[i], full[i].sys.dim));
            dxdt[offset[i] + full[i].port.state_index] += full[i].port.gain * currents[i];
        }
        dxdt[clock] = 1.0;
    };

    State x0(coupled.dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double delay = positive_mod(net.oscillators[i].alpha, full[i].lc.T0);
        const State xi = state_after(full[i].sys, full[i].lc, delay);
        std::copy(xi.begin(), xi.end(), x0.begin() + static_cast<std::ptrdiff_t>(offset[i]));
    }
    double step = std::numeric_limits<double>::infinity();
    for (const auto& f : full) step = std::min(step, f.lc.T0 / static_cast<double>(opts.steps_per_period));

    start = std::chrono::steady_clock::now();
    const Trajectory traj = integrate(coupled, x0, 0.0, t_end, step, Method::rk4);
    report.full_seconds = seconds_since(start);
    report.speedup = report.phase_seconds > 0.0 ? report.full_seconds / report.phase_seconds
                                                : std::numeric_limits<double>::infinity();

    // Phase-model alpha at an arbitrary time by linear interpolation.
    const auto alpha_at = [&](std::size_t i, double t) {
        const auto it = std::upper_bound(trace.times.begin(), trace.times.end(), t);
        if (it == trace.times.begin()) return trace.alpha(0, i);
        if (it == trace.times.end()) return trace.alpha(trace.times.size() - 1, i);
        const auto k = static_cast<std::size_t>(it - trace.times.begin()) - 1;
        const double w = (t - trace.times[k]) / (trace.times[k + 1] - trace.times[k]);
        return trace.alpha(k, i) + w * (trace.alpha(k + 1, i) - trace.alpha(k, i));
    };

    std::vector<double> full_phase_end(n), model_phase_end(n);
    report.phase_err_deg.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& lc = full[i].lc;
        const auto cross = crossing_times(traj, offset[i] + lc.ref_state_index, lc.ref_level,
                                          Direction::rising);
        if (cross.size() < 2) {
            fail(ErrorKind::not_oscillating,
                 "full model of oscillator " + std::to_string(i) + " stopped crossing its mean");
        }
        const double w0 = net.oscillators[i].omega0;
        for (double tc : cross) {
            if (tc < opts.skip_time) continue;
            const double err = std::abs(wrap_deg(w0 * (tc + alpha_at(i, tc))));
            report.phase_err_deg[i] = std::max(report.phase_err_deg[i], err);
        }
        const double last = cross.back();
        const double period = cross.back() - cross[cross.size() - 2];
        full_phase_end[i] = kTwoPi * (t_end - last) / period;
        model_phase_end[i] = w0 * (t_end + trace.alpha(trace.times.size() - 1, i));
    }
    for (std::size_t i = 0; i < n; ++i) {
        report.final_gap_phase_deg.push_back(wrap_deg(model_phase_end[i] - model_phase_end[0]));
        report.final_gap_full_deg.push_back(wrap_deg(full_phase_end[i] - full_phase_end[0]));
    }
    return report;
}

}  // namespace phasekit
