#include "phasekit/dynsys.hpp"

#include "phasekit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace phasekit {

namespace {

bool all_finite(std::span<const double> x) {
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

[[noreturn]] void diverged(double t) {
    std::ostringstream os;
    os.precision(17);
    os << "non-finite state at t = " << t;
    fail(ErrorKind::divergence, os.str());
}

std::size_t grid_index(double at, double t0, double step) {
    return static_cast<std::size_t>(std::llround((at - t0) / step));
}

}  // namespace

void OdeSystem::eval_jacobian(std::span<const double> x, std::span<double> jac) const {
    if (jacobian) {
        jacobian(x, jac);
        return;
    }
    std::vector<double> xp(x.begin(), x.end());
    std::vector<double> fp(dim), fm(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
        xp[j] = x[j] + h;
        field(xp, fp);
        xp[j] = x[j] - h;
        field(xp, fm);
        xp[j] = x[j];
        for (std::size_t i = 0; i < dim; ++i) {
            jac[i * dim + j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
}

std::size_t OdeSystem::state_index(const std::string& name) const {
    const auto it = std::find(state_names.begin(), state_names.end(), name);
    if (it == state_names.end()) {
        fail(ErrorKind::argument, "unknown state '" + name + "'");
    }
    return static_cast<std::size_t>(it - state_names.begin());
}

OdeSystem time_rescaled(const OdeSystem& sys, double factor) {
    require_argument(std::isfinite(factor) && factor > 0.0, "time rescale factor must be > 0");
    OdeSystem out = sys;
    out.field = [inner = sys.field, factor](std::span<const double> x, std::span<double> dxdt) {
        inner(x, dxdt);
        for (double& v : dxdt) v *= factor;
    };
    if (sys.jacobian) {
        out.jacobian = [inner = sys.jacobian, factor](std::span<const double> x,
                                                      std::span<double> jac) {
            inner(x, jac);
            for (double& v : jac) v *= factor;
        };
    }
    out.params["time_scale"] = factor * (sys.params.count("time_scale") ? sys.params.at("time_scale") : 1.0);
    return out;
}

Method parse_method(const std::string& name) {
    if (name == "rk4") return Method::rk4;
    if (name == "euler") return Method::euler;
    fail(ErrorKind::argument, "unknown integration method '" + name + "'");
}

std::string to_string(Method method) {
    return method == Method::rk4 ? "rk4" : "euler";
}

std::vector<double> Trajectory::column(std::size_t i) const {
    std::vector<double> out(size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = value(k, i);
    return out;
}

State Trajectory::final_state() const {
    const auto r = row(size() - 1);
    return {r.begin(), r.end()};
}

Stepper::Stepper(const OdeSystem& sys, Method method)
    : sys_(&sys), method_(method), k1_(sys.dim), k2_(sys.dim), k3_(sys.dim), k4_(sys.dim),
      tmp_(sys.dim) {}

void Stepper::deriv(std::span<const double> x, std::span<double> out,
                    std::span<const double> forcing) {
    sys_->field(x, out);
    if (!forcing.empty()) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += forcing[i];
    }
}

void Stepper::step(std::span<double> x, double h, std::span<const double> forcing) {
    const std::size_t n = x.size();
    if (method_ == Method::euler) {
        deriv(x, k1_, forcing);
        for (std::size_t i = 0; i < n; ++i) x[i] += h * k1_[i];
        return;
    }
    deriv(x, k1_, forcing);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + 0.5 * h * k1_[i];
    deriv(tmp_, k2_, forcing);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + 0.5 * h * k2_[i];
    deriv(tmp_, k3_, forcing);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + h * k3_[i];
    deriv(tmp_, k4_, forcing);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] += h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }
}

Trajectory integrate(const OdeSystem& sys, std::span<const double> x0, double t0, double t1,
                     double step, Method method, std::span<const ImpulseEvent> events,
                     std::span<const RectPulse> pulses) {
    require_argument(std::isfinite(step) && step > 0.0, "integration step must be > 0");
    require_argument(t1 > t0, "integration interval must satisfy t1 > t0");
    require_argument(x0.size() == sys.dim, "initial state has wrong dimension");
    if (!all_finite(x0)) diverged(t0);

    const auto n_steps = static_cast<std::size_t>(std::ceil((t1 - t0) / step - 1e-9));

    std::vector<std::pair<std::size_t, const ImpulseEvent*>> jumps;
    jumps.reserve(events.size());
    for (const auto& ev : events) {
        require_argument(ev.at >= t0 - 0.5 * step && ev.at <= t1 + 0.5 * step,
                         "impulse event outside the integration interval");
        require_argument(ev.delta.size() == sys.dim, "impulse delta has wrong dimension");
        jumps.emplace_back(std::min(grid_index(ev.at, t0, step), n_steps), &ev);
    }
    std::stable_sort(jumps.begin(), jumps.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    struct ActivePulse {
        std::size_t begin, end, index;
        double rate;
    };
    std::vector<ActivePulse> active;
    for (const auto& p : pulses) {
        require_argument(p.state_index < sys.dim, "pulse state index out of range");
        require_argument(p.width > 0.0, "pulse width must be > 0");
        const std::size_t b = grid_index(p.start, t0, step);
        const std::size_t e = grid_index(p.start + p.width, t0, step);
        require_argument(e > b, "pulse narrower than one integration step");
        active.push_back({b, e, p.state_index, p.rate});
    }

    Trajectory traj;
    traj.dim = sys.dim;
    traj.step = step;
    traj.times.resize(n_steps + 1);
    traj.states.resize((n_steps + 1) * sys.dim);

    State x(x0.begin(), x0.end());
    std::vector<double> forcing(active.empty() ? 0 : sys.dim, 0.0);
    Stepper stepper(sys, method);
    auto jump = jumps.begin();

    const auto apply_jumps = [&](std::size_t k) {
        for (; jump != jumps.end() && jump->first == k; ++jump) {
            for (std::size_t i = 0; i < sys.dim; ++i) x[i] += jump->second->delta[i];
        }
    };
    const auto record = [&](std::size_t k) {
        traj.times[k] = t0 + static_cast<double>(k) * step;
        std::copy(x.begin(), x.end(), traj.states.begin() + static_cast<std::ptrdiff_t>(k * sys.dim));
    };

    apply_jumps(0);
    record(0);
    for (std::size_t k = 0; k < n_steps; ++k) {
        if (!active.empty()) {
            std::fill(forcing.begin(), forcing.end(), 0.0);
            for (const auto& p : active) {
                if (k >= p.begin && k < p.end) forcing[p.index] += p.rate;
            }
        }
        stepper.step(x, step, forcing);
        if (!all_finite(x)) diverged(t0 + static_cast<double>(k + 1) * step);
        apply_jumps(k + 1);
        record(k + 1);
    }
    return traj;
}

void advance(Stepper& stepper, std::span<double> x, std::size_t n_steps, double step,
             double t_start) {
    for (std::size_t k = 0; k < n_steps; ++k) {
        stepper.step(x, step);
        if (!all_finite(x)) diverged(t_start + static_cast<double>(k + 1) * step);
    }
}

std::vector<double> crossing_times(std::span<const double> times, std::span<const double> values,
                                   double level, Direction direction) {
    std::vector<double> out;
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
        const double a = values[k] - level;
        const double b = values[k + 1] - level;
        const bool hit = direction == Direction::rising ? (a < 0.0 && b >= 0.0)
                                                        : (a > 0.0 && b <= 0.0);
        if (hit) {
            const double s = a / (a - b);
            out.push_back(times[k] + s * (times[k + 1] - times[k]));
        }
    }
    return out;
}

std::vector<double> crossing_times(const Trajectory& traj, std::size_t state_index, double level,
                                   Direction direction) {
    require_argument(state_index < traj.dim, "crossing state index out of range");
    const auto values = traj.column(state_index);
    return crossing_times(traj.times, values, level, direction);
}

SectionPoint refine_crossing(Stepper& stepper, std::span<const double> left_state,
                             double left_time, double step, std::size_t index, double level) {
    State trial(left_state.begin(), left_state.end());
    const auto g = [&](double tau) {
        std::copy(left_state.begin(), left_state.end(), trial.begin());
        if (tau > 0.0) stepper.step(trial, tau);
        return trial[index] - level;
    };

    double lo = 0.0;
    double hi = step;
    double g_lo = left_state[index] - level;
    double g_hi = g(step);
    if (g_lo == 0.0) return {left_time, State(left_state.begin(), left_state.end())};
    require_argument((g_lo < 0.0) != (g_hi < 0.0), "crossing not bracketed by the step");

    // Illinois variant of regula falsi.
    int side = 0;
    double tau = lo;
    for (int it = 0; it < 60; ++it) {
        tau = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
        const double g_tau = g(tau);
        if (g_tau == 0.0 || (hi - lo) < 1e-15 * step) break;
        if ((g_tau < 0.0) == (g_lo < 0.0)) {
            lo = tau;
            g_lo = g_tau;
            if (side == -1) g_hi *= 0.5;
            side = -1;
        } else {
            hi = tau;
            g_hi = g_tau;
            if (side == 1) g_lo *= 0.5;
            side = 1;
        }
        if (std::abs(g_tau) <= 1e-15 * (std::abs(level) + std::abs(trial[index]) + 1e-300)) break;
    }
    g(tau);
    return {left_time + tau, trial};
}

}  // namespace phasekit
