#include "phasekit/limit_cycle.hpp"

#include "phasekit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace phasekit {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kProbeWindow = 4096;
constexpr std::size_t kProbeBudget = std::size_t{1} << 22;

std::string num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// Per-cycle extremes of a sampled signal, refined by a parabola through each
// interior local extremum.
class ExtremaTracker {
public:
    void push(double v) {
        if (count_ >= 2) {
            if (b_ > a_ && b_ >= v) hi_ = std::max(hi_, vertex(a_, b_, v));
            if (b_ < a_ && b_ <= v) lo_ = std::min(lo_, vertex(a_, b_, v));
        }
        hi_ = std::max(hi_, v);
        lo_ = std::min(lo_, v);
        a_ = b_;
        b_ = v;
        ++count_;
    }
    void reset_extremes() {
        hi_ = -std::numeric_limits<double>::infinity();
        lo_ = std::numeric_limits<double>::infinity();
    }
    [[nodiscard]] double hi() const { return hi_; }
    [[nodiscard]] double lo() const { return lo_; }

private:
    static double vertex(double a, double b, double c) {
        const double denom = a - 2.0 * b + c;
        if (denom == 0.0) return b;
        const double p = 0.5 * (a - c) / denom;
        return b - 0.25 * (a - c) * p;
    }

    double a_ = 0.0, b_ = 0.0;
    std::size_t count_ = 0;
    double hi_ = -std::numeric_limits<double>::infinity();
    double lo_ = std::numeric_limits<double>::infinity();
};

struct Probe {
    State state;        // state at the end of the probe
    double period = 0;  // gap between the last two rising mid-level crossings
    double level = 0;   // mid-range of the last full cycle
    double lo = 0, hi = 0;
};

// Integrates in doubling windows until at least three rising crossings of the
// running mid-range are seen.
Probe probe_oscillation(Stepper& stepper, std::span<const double> x0, double step,
                        std::size_t out_idx) {
    State x(x0.begin(), x0.end());
    std::vector<double> times{0.0};
    std::vector<double> values{x[out_idx]};
    std::size_t window = kProbeWindow;
    std::size_t total = 0;
    while (true) {
        for (std::size_t k = 0; k < window; ++k) {
            advance(stepper, x, 1, step, static_cast<double>(total) * step);
            ++total;
            times.push_back(static_cast<double>(total) * step);
            values.push_back(x[out_idx]);
        }
        const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
        const double range = *mx - *mn;
        if (range > 1e-12 * (1.0 + std::abs(*mx))) {
            const double level = 0.5 * (*mn + *mx);
            const auto cross = crossing_times(times, values, level, Direction::rising);
            if (cross.size() >= 3) {
                Probe p;
                p.state = x;
                p.period = cross[cross.size() - 1] - cross[cross.size() - 2];
                const auto first = static_cast<std::size_t>(cross[cross.size() - 2] / step);
                const auto [lo, hi] = std::minmax_element(values.begin() + static_cast<std::ptrdiff_t>(first),
                                                          values.end());
                p.lo = *lo;
                p.hi = *hi;
                p.level = 0.5 * (*lo + *hi);
                return p;
            }
        }
        if (total >= kProbeBudget) {
            fail(ErrorKind::not_oscillating,
                 "no sustained rising crossings of the output within " + num(static_cast<double>(total) * step) +
                     " s");
        }
        window *= 2;
    }
}

}  // namespace

double LimitCycle::grid_theta(std::size_t k) const {
    return kTwoPi * static_cast<double>(k) / static_cast<double>(grid_size);
}

double LimitCycle::output_at(double theta) const {
    const double n = static_cast<double>(grid_size);
    double u = theta / kTwoPi * n;
    u -= n * std::floor(u / n);
    auto k = static_cast<std::size_t>(u);
    if (k >= grid_size) k = 0;
    const double frac = u - static_cast<double>(k);
    const std::size_t k1 = (k + 1) % grid_size;
    const double a = orbit[k * dim + ref_state_index];
    const double b = orbit[k1 * dim + ref_state_index];
    return a + frac * (b - a);
}

std::vector<double> LimitCycle::output_samples() const {
    std::vector<double> out(grid_size);
    for (std::size_t k = 0; k < grid_size; ++k) out[k] = orbit[k * dim + ref_state_index];
    return out;
}

State settle(const OdeSystem& sys, std::span<const double> x0, int settle_periods_hint, double step,
             const CycleOptions& opts) {
    require_argument(settle_periods_hint >= 1, "settle periods hint must be >= 1");
    require_argument(step > 0.0, "integration step must be > 0");
    require_argument(opts.output_index < sys.dim, "output state index out of range");
    require_argument(x0.size() == sys.dim, "initial state has wrong dimension");

    Stepper stepper(sys, opts.method);
    const std::size_t out = opts.output_index;
    const std::size_t dim = sys.dim;
    Probe probe = probe_oscillation(stepper, x0, step, out);

    State x = probe.state;
    State x_prev = x;
    double level = probe.level;
    const double first_amplitude = probe.hi - probe.lo;
    const auto max_gap_steps = static_cast<std::size_t>(20.0 * probe.period / step) + 16;
    // A moving level can be re-crossed at once; real cycles are far longer.
    const auto min_gap_steps = static_cast<std::size_t>(0.25 * probe.period / step);

    // Coarse phase: sampled peak-to-peak amplitude until it changes by less
    // than kCoarseTol per cycle, moving the level to the cycle's mid-range.
    // Fine phase: level frozen, refined section states compared cycle to cycle.
    constexpr double kCoarseTol = 1e-4;
    bool fine = false;
    ExtremaTracker tracker;
    std::vector<double> lo(dim), hi(dim);
    const auto reset_ranges = [&] {
        std::fill(lo.begin(), lo.end(), std::numeric_limits<double>::infinity());
        std::fill(hi.begin(), hi.end(), -std::numeric_limits<double>::infinity());
    };
    reset_ranges();
    State section;
    double prev_amplitude = -1.0;
    int cycles = 0;
    bool armed = false;  // first crossing only starts the first measured cycle
    std::size_t since_crossing = 0;
    double t = 0.0;
    while (true) {
        std::copy(x.begin(), x.end(), x_prev.begin());
        advance(stepper, x, 1, step, t);
        t += step;
        const double v = x[out];
        tracker.push(v);
        for (std::size_t i = 0; i < dim; ++i) {
            lo[i] = std::min(lo[i], x[i]);
            hi[i] = std::max(hi[i], x[i]);
        }
        ++since_crossing;
        if (x_prev[out] < level && v >= level && (!armed || since_crossing > min_gap_steps)) {
            if (armed) {
                ++cycles;
                const double amplitude = tracker.hi() - tracker.lo();
                if (amplitude < 1e-9 * first_amplitude) {
                    fail(ErrorKind::not_oscillating, "oscillation amplitude decayed to zero");
                }
                double change = std::numeric_limits<double>::infinity();
                if (fine) {
                    const SectionPoint sp = refine_crossing(stepper, x_prev, t - step, step, out, level);
                    if (!section.empty()) {
                        change = 0.0;
                        for (std::size_t i = 0; i < dim; ++i) {
                            const double scale = std::max(hi[i] - lo[i], 1e-300);
                            change = std::max(change, std::abs(sp.state[i] - section[i]) / scale);
                        }
                    }
                    section = sp.state;
                    if (change < opts.settle_tol && cycles >= settle_periods_hint) return x;
                } else if (prev_amplitude > 0.0) {
                    change = std::abs(amplitude - prev_amplitude) / amplitude;
                    if (change < kCoarseTol) fine = true;
                }
                if (cycles > opts.max_settle_periods) {
                    fail(ErrorKind::non_convergence,
                         "amplitude still drifting after " + std::to_string(opts.max_settle_periods) +
                             " periods (last relative change " + num(change) + ")");
                }
                prev_amplitude = amplitude;
                if (!fine) level = 0.5 * (tracker.hi() + tracker.lo());
            }
            armed = true;
            tracker.reset_extremes();
            reset_ranges();
            since_crossing = 0;
        }
        if (since_crossing > max_gap_steps) {
            fail(ErrorKind::not_oscillating, "output stopped crossing its mid-level");
        }
    }
}

LimitCycle find_period(const OdeSystem& sys, std::span<const double> settled, double step,
                       const CycleOptions& opts) {
    require_argument(step > 0.0, "integration step must be > 0");
    require_argument(opts.output_index < sys.dim, "output state index out of range");
    require_argument(opts.period_crossings >= 2, "period crossings must be >= 2");
    require_argument(opts.grid_size >= 8, "grid size must be >= 8");

    Stepper stepper(sys, opts.method);
    const std::size_t out = opts.output_index;
    const std::size_t K = static_cast<std::size_t>(opts.period_crossings);
    const Probe probe = probe_oscillation(stepper, settled, step, out);

    const Trajectory traj = integrate(sys, probe.state, 0.0,
                                      static_cast<double>(K + 3) * probe.period, step, opts.method);
    const auto values = traj.column(out);

    // Indices k with a rising crossing of `level` between samples k and k+1.
    const auto rising_indices = [&](double level) {
        std::vector<std::size_t> idx;
        for (std::size_t k = 0; k + 1 < values.size(); ++k) {
            if (values[k] < level && values[k + 1] >= level) idx.push_back(k);
        }
        return idx;
    };
    const auto refine = [&](std::size_t k, double level) {
        return refine_crossing(stepper, traj.row(k), traj.times[k], step, out, level);
    };

    // One-period time average of the output between two mid-range crossings.
    const auto mid = rising_indices(probe.level);
    if (mid.size() < 2) fail(ErrorKind::not_oscillating, "too few crossings while locating the mean");
    const double ta = refine(mid[0], probe.level).time;
    const double tb = refine(mid[1], probe.level).time;
    double integral = 0.5 * (probe.level + values[mid[0] + 1]) * (traj.times[mid[0] + 1] - ta);
    for (std::size_t k = mid[0] + 1; k < mid[1]; ++k) {
        integral += 0.5 * (values[k] + values[k + 1]) * step;
    }
    integral += 0.5 * (values[mid[1]] + probe.level) * (tb - traj.times[mid[1]]);
    const double ref_level = integral / (tb - ta);

    const auto idx = rising_indices(ref_level);
    if (idx.size() < K + 1) {
        fail(ErrorKind::not_oscillating, "too few crossings of the output mean");
    }
    std::vector<SectionPoint> crossings;
    for (std::size_t j = idx.size() - (K + 1); j < idx.size(); ++j) {
        crossings.push_back(refine(idx[j], ref_level));
    }
    double gmin = std::numeric_limits<double>::infinity();
    double gmax = -gmin;
    for (std::size_t j = 1; j < crossings.size(); ++j) {
        const double gap = crossings[j].time - crossings[j - 1].time;
        gmin = std::min(gmin, gap);
        gmax = std::max(gmax, gap);
    }
    LimitCycle lc;
    lc.T0 = (crossings.back().time - crossings.front().time) / static_cast<double>(K);
    lc.omega0 = kTwoPi / lc.T0;
    lc.period_spread = (gmax - gmin) / lc.T0;
    if (lc.period_spread > opts.period_tol) {
        fail(ErrorKind::period_unstable,
             "crossing-interval spread " + num(lc.period_spread) + " exceeds period_tol " +
                 num(opts.period_tol));
    }

    lc.dim = sys.dim;
    lc.grid_size = opts.grid_size;
    lc.ref_state_index = out;
    lc.ref_level = ref_level;
    lc.method = opts.method;
    const std::size_t substeps =
        std::max<std::size_t>(1, (opts.steps_per_period + opts.grid_size - 1) / opts.grid_size);
    const std::size_t total_steps = substeps * opts.grid_size;
    lc.step = lc.T0 / static_cast<double>(total_steps);

    State x = crossings.back().state;
    const State start = x;
    lc.orbit.resize(opts.grid_size * sys.dim);
    for (std::size_t k = 0; k < opts.grid_size; ++k) {
        std::copy(x.begin(), x.end(), lc.orbit.begin() + static_cast<std::ptrdiff_t>(k * sys.dim));
        advance(stepper, x, substeps, lc.step);
    }
    double mean = 0.0;
    for (std::size_t k = 0; k < opts.grid_size; ++k) mean += lc.orbit[k * sys.dim + out];
    lc.mean_output = mean / static_cast<double>(opts.grid_size);

    double closure = 0.0;
    for (std::size_t i = 0; i < sys.dim; ++i) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t k = 0; k < opts.grid_size; ++k) {
            lo = std::min(lo, lc.orbit[k * sys.dim + i]);
            hi = std::max(hi, lc.orbit[k * sys.dim + i]);
        }
        const double scale = std::max(hi - lo, 1e-300);
        closure = std::max(closure, std::abs(x[i] - start[i]) / scale);
    }
    lc.closure_error = closure;
    return lc;
}

LimitCycle steady_state(const OdeSystem& sys, std::span<const double> x0, int settle_periods_hint,
                        double bootstrap_step, const CycleOptions& opts) {
    const State settled = settle(sys, x0, settle_periods_hint, bootstrap_step, opts);
    const LimitCycle coarse = find_period(sys, settled, bootstrap_step, opts);
    const double step = coarse.T0 / static_cast<double>(opts.steps_per_period);
    return find_period(sys, coarse.section_state(), step, opts);
}

State state_after(const OdeSystem& sys, const LimitCycle& lc, double delay) {
    require_argument(delay >= 0.0, "delay must be >= 0");
    Stepper stepper(sys, lc.method);
    State x = lc.section_state();
    const auto full = static_cast<std::size_t>(std::floor(delay / lc.step));
    advance(stepper, x, full, lc.step);
    const double rest = delay - static_cast<double>(full) * lc.step;
    if (rest > 0.0) stepper.step(x, rest);
    return x;
}

double wrap_angle(double theta) {
    double w = std::remainder(theta, kTwoPi);
    if (w <= -std::numbers::pi) w += kTwoPi;
    return w;
}

double asymptotic_phase_shift(std::span<const double> free_crossings,
                              std::span<const double> perturbed_crossings, double measure_from,
                              const LimitCycle& lc, const PhaseShiftOptions& opts) {
    require_argument(opts.crossings >= 1, "phase-shift crossing count must be >= 1");
    const std::size_t K = static_cast<std::size_t>(opts.crossings);

    struct Pair {
        double free, perturbed;
    };
    std::vector<Pair> pairs;
    for (double tf : free_crossings) {
        if (tf < measure_from) continue;
        const auto it = std::lower_bound(perturbed_crossings.begin(), perturbed_crossings.end(), tf);
        double best = std::numeric_limits<double>::infinity();
        if (it != perturbed_crossings.end()) best = *it;
        if (it != perturbed_crossings.begin() && std::abs(*(it - 1) - tf) < std::abs(best - tf)) {
            best = *(it - 1);
        }
        if (std::abs(best - tf) < 0.5 * lc.T0 && best >= measure_from) pairs.push_back({tf, best});
    }
    if (pairs.size() < K) {
        fail(ErrorKind::restabilization,
             "only " + std::to_string(pairs.size()) + " matched crossings after the discard window; "
             "run longer trajectories");
    }
    const std::span<const Pair> tail(pairs.end() - static_cast<std::ptrdiff_t>(K), pairs.end());
    for (std::size_t j = 1; j < tail.size(); ++j) {
        const double gap = tail[j].perturbed - tail[j - 1].perturbed;
        if (std::abs(gap - lc.T0) > opts.period_tol * lc.T0) {
            fail(ErrorKind::restabilization,
                 "perturbed crossing interval deviates from T0 by " +
                     num(std::abs(gap - lc.T0) / lc.T0) +
                     " (relative); increase discard periods or run longer");
        }
    }
    double sum = 0.0;
    for (const auto& p : tail) sum += p.free - p.perturbed;
    return wrap_angle(lc.omega0 * sum / static_cast<double>(K));
}

double asymptotic_phase_shift(const Trajectory& free, const Trajectory& perturbed,
                              const LimitCycle& lc, int discard_periods,
                              const PhaseShiftOptions& opts) {
    require_argument(discard_periods >= 0, "discard periods must be >= 0");
    const auto cf = crossing_times(free, lc.ref_state_index, lc.ref_level, Direction::rising);
    const auto cp = crossing_times(perturbed, lc.ref_state_index, lc.ref_level, Direction::rising);
    const double start = std::max(free.times.front(), perturbed.times.front());
    return asymptotic_phase_shift(cf, cp, start + discard_periods * lc.T0, lc, opts);
}

}  // namespace phasekit
