#pragma once

// Phase-domain macromodel: each oscillator is reduced to its free-running
// frequency and PPV, and injected current b(t) moves its time shift alpha via
//
//   d alpha / dt = Gamma(omega0 (t + alpha)) * b(t).
//
// Phase of oscillator i is omega0_i (t + alpha_i).

#include "phasekit/dynsys.hpp"
#include "phasekit/limit_cycle.hpp"
#include "phasekit/models.hpp"
#include "phasekit/ppv.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace phasekit {

/// Injected current in amperes as a function of absolute time.
using Waveform = std::function<double(double t)>;

struct PhaseOscillator {
    double omega0 = 0.0;
    PpvCurve gamma;
    double alpha = 0.0;  // s

    /// Uses gamma's own cycle for omega0.
    [[nodiscard]] static PhaseOscillator from_ppv(PpvCurve ppv, double alpha = 0.0);

    [[nodiscard]] double T0() const noexcept;
    [[nodiscard]] double phase(double t) const;
    /// Output on the stored orbit at this oscillator's phase at time t.
    [[nodiscard]] double output(double t, double alpha_now) const;
    void validate() const;
};

/// One RK4 step of the alpha equation from t to t + dt. Requires dt <= T0/200.
[[nodiscard]] double phase_step(const PhaseOscillator& osc, const Waveform& b, double t, double dt);

struct LockOptions {
    /// Steps per injection period; the step must also satisfy dt <= T0/200.
    std::size_t steps_per_cycle = 256;
    /// Injection periods at the end of the run that must all show lock.
    std::size_t window_cycles = 50;
    double freq_tol = 1e-4;  // relative to w_inj
};

struct LockReport {
    bool locked = false;
    /// Oscillator phase minus injection phase, deg in (-180, 180], when locked.
    std::optional<double> steady_phase_deg;
    /// |mean frequency - w_inj| in rad/s, when not locked.
    std::optional<double> beat_freq;
    /// Largest per-cycle relative frequency error inside the final window.
    double window_freq_error = 0.0;
    /// Mean oscillator frequency over the final window, rad/s.
    double mean_freq = 0.0;
};

/// Drives the oscillator with b(t) = amp cos(w_inj t) for horizon_periods
/// injection periods and classifies the outcome.
[[nodiscard]] LockReport injection_lock(const PhaseOscillator& osc, double amp, double w_inj,
                                        int horizon_periods, const LockOptions& opts = {});

/// Half-width of the 1:1 lock range |w_inj - omega0| for b = amp cos(w_inj t),
/// from the first Fourier harmonic c1 of gamma: omega0 * amp * |c1| / 2.
[[nodiscard]] double adler_lock_range(const PpvCurve& gamma, double amp);

/// Maps the source oscillator's output value to the current injected into
/// the target.
using CouplingKernel = std::function<double(double source_output)>;

/// i = gain * v, gain in A per output unit.
[[nodiscard]] CouplingKernel linear_kernel(double gain);

struct Injection {
    std::size_t target = 0;
    Waveform current;
};

struct Coupling {
    std::size_t from = 0;
    std::size_t to = 0;
    CouplingKernel kernel;
    /// Linear gain when the kernel is linear_kernel(gain); used by the
    /// full-ODE co-simulation and by network files.
    double gain = 0.0;
};

struct PhaseNetwork {
    std::vector<PhaseOscillator> oscillators;
    std::vector<Injection> injections;
    std::vector<Coupling> couplings;

    void validate() const;
    /// min_i T0_i / 500.
    [[nodiscard]] double default_dt() const;
    /// Adds i_to = gain (v_from - v_to) as a pair of linear edges.
    void add_diffusive(std::size_t from, std::size_t to, double gain);
};

struct PhaseTrace {
    std::size_t count = 0;  // oscillators
    std::vector<double> times;
    std::vector<double> alphas;  // times.size() x count
    std::vector<double> phases;  // times.size() x count, wrapped to [0, 2 pi)

    [[nodiscard]] double alpha(std::size_t k, std::size_t i) const { return alphas[k * count + i]; }
    [[nodiscard]] double phase(std::size_t k, std::size_t i) const { return phases[k * count + i]; }
};

/// Synchronous RK4 over all alphas with step dt from t = 0 to t_end. Every
/// record_every-th step (and the last) is stored.
[[nodiscard]] PhaseTrace simulate_network(const PhaseNetwork& net, double t_end, double dt,
                                          std::size_t record_every = 1);

/// Full model of one network member for co-simulation.
struct FullOscillator {
    OdeSystem sys;
    LimitCycle lc;
    InjectionPort port;
};

struct CosimOptions {
    /// Full-ODE steps per shortest period.
    std::size_t steps_per_period = 2000;
    /// Crossings before this time are ignored in the error statistics.
    double skip_time = 0.0;
};

struct CosimReport {
    /// Max |phase model - full ODE| over full-ODE output crossings, deg.
    std::vector<double> phase_err_deg;
    /// Phase of oscillator i minus oscillator 0 at the end, deg in (-180, 180].
    std::vector<double> final_gap_phase_deg;
    std::vector<double> final_gap_full_deg;
    double phase_seconds = 0.0;
    double full_seconds = 0.0;
    double speedup = 0.0;
};

/// Runs the phase model and the coupled full ODE (each oscillator started on
/// its cycle at the phase model's initial phase) and compares phases at the
/// full-ODE rising crossings of each output.
[[nodiscard]] CosimReport cosim_compare(const PhaseNetwork& net,
                                        std::span<const FullOscillator> full, double t_end,
                                        const CosimOptions& opts = {});

}  // namespace phasekit
